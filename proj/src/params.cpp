#include "multike/params.hpp"

#include <cmath>

namespace multike {

Tensor& ParameterStore::add(const std::string& name, Tensor t, bool trainable) {
    if (tensors_.count(name))
        throw std::invalid_argument("parameter already registered: " + name);
    trainable_[name] = trainable;
    return tensors_[name] = std::move(t);
}

Tensor& ParameterStore::at(const std::string& name) {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw std::out_of_range("unknown parameter: " + name);
    return it->second;
}

const Tensor& ParameterStore::at(const std::string& name) const {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw std::out_of_range("unknown parameter: " + name);
    return it->second;
}

bool ParameterStore::trainable(const std::string& name) const {
    auto it = trainable_.find(name);
    if (it == trainable_.end()) throw std::out_of_range("unknown parameter: " + name);
    return it->second;
}

void ParameterStore::set_trainable(const std::string& name, bool flag) {
    if (!tensors_.count(name)) throw std::out_of_range("unknown parameter: " + name);
    trainable_[name] = flag;
}

Tensor& Gradients::of(const std::string& name) {
    auto it = grads_.find(name);
    if (it != grads_.end()) return it->second;
    const Tensor& shape = ref_->at(name);
    return grads_[name] = Tensor(shape.rows(), shape.cols());
}

const Tensor* Gradients::find(const std::string& name) const {
    auto it = grads_.find(name);
    return it == grads_.end() ? nullptr : &it->second;
}

Tensor xavier_init(std::size_t rows, std::size_t cols, Rng& rng) {
    if (rows == 0 || cols == 0)
        throw std::invalid_argument("xavier_init: zero dimension");
    double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Tensor t(rows, cols);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
    return t;
}

void AdaGrad::step(ParameterStore& params, const Gradients& grads) {
    for (const auto& [name, g] : grads.entries()) {
        if (!params.trainable(name)) continue;
        Tensor& p = params.at(name);
        if (!p.same_shape(g))
            throw std::invalid_argument("adagrad: shape mismatch for " + name);
        auto it = accum_.find(name);
        if (it == accum_.end())
            it = accum_.emplace(name, Tensor(p.rows(), p.cols())).first;
        Tensor& acc = it->second;
        for (std::size_t i = 0; i < p.size(); ++i) {
            double gi = g[i];
            if (gi == 0.0) continue;
            acc[i] += gi * gi;
            p[i] -= lr_ * gi / (std::sqrt(acc[i]) + eps_);
        }
    }
}

const Tensor* AdaGrad::accumulator(const std::string& name) const {
    auto it = accum_.find(name);
    return it == accum_.end() ? nullptr : &it->second;
}

FdReport finite_difference_check(
    const std::function<double(const ParameterStore&)>& loss_fn,
    const ParameterStore& params, const Gradients& analytic, double h,
    double tolerance) {
    if (h <= 0.0) throw std::invalid_argument("finite_difference_check: h must be positive");
    ParameterStore work = params;
    FdReport report;
    for (const auto& [name, tensor] : params.tensors()) {
        if (!params.trainable(name)) continue;
        const Tensor* grad = analytic.find(name);
        Tensor& wt = work.at(name);
        for (std::size_t i = 0; i < tensor.size(); ++i) {
            double orig = wt[i];
            wt[i] = orig + h;
            double up = loss_fn(work);
            wt[i] = orig - h;
            double down = loss_fn(work);
            wt[i] = orig;
            if (!std::isfinite(up) || !std::isfinite(down))
                throw std::runtime_error("finite_difference_check: non-finite loss at " + name);
            double numeric = (up - down) / (2.0 * h);
            double analytic_v = grad ? (*grad)[i] : 0.0;
            double denom = std::max({std::fabs(analytic_v), std::fabs(numeric), 1e-8});
            double rel = std::fabs(analytic_v - numeric) / denom;
            if (rel > report.max_rel_err) {
                report.max_rel_err = rel;
                report.worst_param = name;
                report.worst_index = i;
            }
        }
    }
    report.pass = report.max_rel_err < tolerance;
    return report;
}

} // namespace multike
