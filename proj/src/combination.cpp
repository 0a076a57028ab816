#include "multike/combination.hpp"

#include <cmath>

namespace multike {

std::string map_param_name(int view) { return "map" + std::to_string(view); }

namespace {

const Tensor& resolve(const ParameterStore& params, const ViewRef& view) {
    if (view.param) return params.at(view.param);
    if (!view.fixed) throw std::invalid_argument("view reference resolves to nothing");
    return *view.fixed;
}

bool row_active(const ViewRef& view, std::size_t r) {
    return !view.mask || (*view.mask)[r] != 0;
}

bool row_active(const FixedView& view, std::size_t r) {
    return !view.mask || (*view.mask)[r] != 0;
}

} // namespace

WvaResult combine_wva(const std::vector<std::span<const double>>& views) {
    if (views.empty()) throw std::invalid_argument("combine_wva: no views");
    std::size_t d = views[0].size();
    std::size_t n = views.size();
    WvaResult res;
    res.combined.assign(d, 0.0);
    res.weights.assign(n, 0.0);

    std::vector<double> mean(d, 0.0);
    for (const auto& v : views) {
        if (v.size() != d) throw std::invalid_argument("combine_wva: dimension mismatch");
        axpy(1.0 / static_cast<double>(n), v, mean);
    }
    double denom = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        res.weights[i] = cosine(views[i], mean);
        denom += res.weights[i];
    }
    if (denom <= 1e-6) {
        std::fill(res.weights.begin(), res.weights.end(), 1.0 / static_cast<double>(n));
    } else {
        for (auto& w : res.weights) w /= denom;
    }
    for (std::size_t i = 0; i < n; ++i) axpy(res.weights[i], views[i], res.combined);
    return res;
}

Tensor combine_wva_matrix(const ParameterStore& params, const std::vector<ViewRef>& views) {
    if (views.empty()) throw std::invalid_argument("combine_wva_matrix: no views");
    const Tensor& first = resolve(params, views[0]);
    Tensor out(first.rows(), first.cols());
    std::vector<std::span<const double>> active;
    for (std::size_t r = 0; r < first.rows(); ++r) {
        active.clear();
        for (const auto& view : views)
            if (row_active(view, r)) active.push_back(resolve(params, view).row(r));
        if (active.empty()) continue; // zero row: entity visible in no view
        auto res = combine_wva(active);
        std::copy(res.combined.begin(), res.combined.end(), out.row(r).begin());
    }
    return out;
}

double loss_itc(const ParameterStore& params, const std::vector<ViewRef>& views,
                Gradients* grads, const std::vector<int>* rows) {
    const Tensor& combined = params.at(kCombined);
    std::vector<int> all;
    if (!rows) {
        all.resize(combined.rows());
        for (std::size_t r = 0; r < all.size(); ++r) all[r] = static_cast<int>(r);
        rows = &all;
    }
    double loss = 0.0;
    for (const auto& view : views) {
        const Tensor& h = resolve(params, view);
        if (!h.same_shape(combined))
            throw std::invalid_argument("loss_itc: view shape mismatch");
        bool trainable_view = view.param && params.trainable(view.param);
        for (int ri : *rows) {
            auto r = static_cast<std::size_t>(ri);
            if (r >= h.rows()) throw std::out_of_range("loss_itc: row index out of range");
            if (!row_active(view, r)) continue;
            auto hc = combined.row(r);
            auto hv = h.row(r);
            for (std::size_t j = 0; j < h.cols(); ++j) {
                double e = hc[j] - hv[j];
                loss += e * e;
                if (!grads) continue;
                grads->row(kCombined, r)[j] += 2.0 * e;
                if (trainable_view) grads->row(view.param, r)[j] -= 2.0 * e;
            }
        }
    }
    return loss;
}

double orthogonality_residual(const Tensor& z) {
    std::size_t d = z.rows();
    double acc = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < d; ++b) {
            double ztz = 0.0;
            for (std::size_t k = 0; k < d; ++k) ztz += z.at(k, a) * z.at(k, b);
            double m = (a == b ? 1.0 : 0.0) - ztz;
            acc += m * m;
        }
    }
    return std::sqrt(acc);
}

double loss_ssl(const ParameterStore& params, const std::vector<FixedView>& views,
                Gradients* grads) {
    const Tensor& combined = params.at(kCombined);
    std::size_t n = combined.rows(), d = combined.cols();
    double loss = 0.0;
    for (std::size_t i = 0; i < views.size(); ++i) {
        const Tensor& h = *views[i].matrix;
        if (h.rows() != n || h.cols() != d)
            throw std::invalid_argument("loss_ssl: view shape mismatch");
        std::string zname = map_param_name(static_cast<int>(i) + 1);
        const Tensor& z = params.at(zname);

        // fit term over unmasked rows
        std::vector<double> proj(d), err(d);
        for (std::size_t r = 0; r < n; ++r) {
            if (!row_active(views[i], r)) continue;
            auto hv = h.row(r);
            for (std::size_t b = 0; b < d; ++b) {
                double s = 0.0;
                for (std::size_t a = 0; a < d; ++a) s += hv[a] * z.at(a, b);
                proj[b] = s;
                err[b] = combined.at(r, b) - s;
                loss += err[b] * err[b];
            }
            if (!grads) continue;
            auto gc = grads->row(kCombined, r);
            Tensor& gz = grads->of(zname);
            for (std::size_t b = 0; b < d; ++b) {
                gc[b] += 2.0 * err[b];
                for (std::size_t a = 0; a < d; ++a) gz.at(a, b) -= 2.0 * hv[a] * err[b];
            }
        }

        // orthogonality term || I - Z^T Z ||_F^2, gradient -4 Z (I - Z^T Z)
        Tensor m(d, d);
        for (std::size_t a = 0; a < d; ++a) {
            for (std::size_t b = 0; b < d; ++b) {
                double ztz = 0.0;
                for (std::size_t k = 0; k < d; ++k) ztz += z.at(k, a) * z.at(k, b);
                m.at(a, b) = (a == b ? 1.0 : 0.0) - ztz;
                loss += m.at(a, b) * m.at(a, b);
            }
        }
        if (grads) {
            Tensor& gz = grads->of(zname);
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = 0; b < d; ++b) {
                    double s = 0.0;
                    for (std::size_t k = 0; k < d; ++k) s += z.at(a, k) * m.at(k, b);
                    gz.at(a, b) -= 4.0 * s;
                }
        }
    }
    return loss;
}

SslResult train_shared_space(const std::vector<FixedView>& views, int epochs, double lr) {
    if (views.empty()) throw std::invalid_argument("train_shared_space: no views");
    std::size_t n = views[0].matrix->rows(), d = views[0].matrix->cols();

    ParameterStore params;
    Tensor init(n, d);
    for (std::size_t r = 0; r < n; ++r) {
        int active = 0;
        for (const auto& view : views) {
            if (!row_active(view, r)) continue;
            ++active;
            axpy(1.0, view.matrix->row(r), init.row(r));
        }
        if (active > 1)
            for (auto& v : init.row(r)) v /= static_cast<double>(active);
    }
    params.add(kCombined, std::move(init));
    for (std::size_t i = 0; i < views.size(); ++i) {
        Tensor z(d, d);
        for (std::size_t a = 0; a < d; ++a) z.at(a, a) = 1.0;
        params.add(map_param_name(static_cast<int>(i) + 1), std::move(z));
    }

    AdaGrad opt(lr);
    Gradients grads(params);
    SslResult res;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        grads.clear();
        res.loss_curve.push_back(loss_ssl(params, views, &grads));
        opt.step(params, grads);
    }

    res.combined = params.at(kCombined);
    for (std::size_t i = 0; i < views.size(); ++i) {
        const Tensor& z = params.at(map_param_name(static_cast<int>(i) + 1));
        res.maps.push_back(z);
        res.orth_residuals.push_back(orthogonality_residual(z));
    }
    return res;
}

} // namespace multike
