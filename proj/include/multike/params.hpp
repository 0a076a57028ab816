#ifndef MULTIKE_PARAMS_HPP
#define MULTIKE_PARAMS_HPP

#include <functional>
#include <map>
#include <string>

#include "multike/common.hpp"
#include "multike/tensor.hpp"

namespace multike {

// Named dense tensors with a per-tensor trainable flag. std::map keeps
// iteration order deterministic for checkpoints and updates.
class ParameterStore {
public:
    Tensor& add(const std::string& name, Tensor t, bool trainable = true);
    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;
    bool has(const std::string& name) const { return tensors_.count(name) > 0; }
    bool trainable(const std::string& name) const;
    void set_trainable(const std::string& name, bool flag);

    const std::map<std::string, Tensor>& tensors() const { return tensors_; }

private:
    std::map<std::string, Tensor> tensors_;
    std::map<std::string, bool> trainable_;
};

// Gradient accumulator matching a store's shapes. Tensors are created lazily
// and zero-initialized, so untouched parameters carry no entry at all.
class Gradients {
public:
    explicit Gradients(const ParameterStore& ref) : ref_(&ref) {}

    Tensor& of(const std::string& name);
    std::span<double> row(const std::string& name, std::size_t r) { return of(name).row(r); }
    const Tensor* find(const std::string& name) const;
    void clear() { grads_.clear(); }

    const std::map<std::string, Tensor>& entries() const { return grads_; }

private:
    const ParameterStore* ref_;
    std::map<std::string, Tensor> grads_;
};

// entries uniform in [-sqrt(6/(rows+cols)), +sqrt(6/(rows+cols))]
Tensor xavier_init(std::size_t rows, std::size_t cols, Rng& rng);

// accumulator += g^2; param -= lr * g / (sqrt(accumulator) + eps)
class AdaGrad {
public:
    explicit AdaGrad(double lr, double eps = 1e-8) : lr_(lr), eps_(eps) {}

    void step(ParameterStore& params, const Gradients& grads);

    double lr() const { return lr_; }
    const Tensor* accumulator(const std::string& name) const;

private:
    double lr_;
    double eps_;
    std::map<std::string, Tensor> accum_;
};

struct FdReport {
    double max_rel_err = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    bool pass = false;
};

// Central-difference check of an analytic gradient. Every trainable tensor in
// the store is perturbed coordinate by coordinate; a missing entry in
// `analytic` is treated as an all-zero gradient, which catches dropped terms.
FdReport finite_difference_check(
    const std::function<double(const ParameterStore&)>& loss_fn,
    const ParameterStore& params, const Gradients& analytic, double h,
    double tolerance);

} // namespace multike

#endif
