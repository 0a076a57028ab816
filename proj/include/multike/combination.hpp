#ifndef MULTIKE_COMBINATION_HPP
#define MULTIKE_COMBINATION_HPP

#include <string>
#include <vector>

#include "multike/params.hpp"

namespace multike {

inline constexpr const char* kCombined = "combined"; // n_entities x d

// mapping-matrix parameter name for view i (1-based): "map1", "map2", ...
std::string map_param_name(int view);

// One view of the entity matrix as seen by a combination strategy. When
// `param` is set the matrix is the named trainable tensor in the store;
// otherwise `fixed` points at a frozen matrix (the name view). A null mask
// means every row participates.
struct ViewRef {
    const char* param = nullptr;
    const Tensor* fixed = nullptr;
    const std::vector<char>* mask = nullptr;
};

struct WvaResult {
    std::vector<double> combined;
    std::vector<double> weights; // one per input view, sums to 1
};

// Weighted view averaging for one entity: w_i proportional to the cosine
// between view i and the plain view mean, uniform fallback when the cosine
// sum is <= 1e-6.
WvaResult combine_wva(const std::vector<std::span<const double>>& views);

// Row-wise WVA over whole view matrices, honoring per-view row masks;
// entities with no unmasked view get a zero row.
Tensor combine_wva_matrix(const ParameterStore& params, const std::vector<ViewRef>& views);

// sum_i || H~ - H(i) ||_F^2 over unmasked rows. Gradients flow to the
// combined matrix and to every view stored as a trainable parameter. A
// non-null `rows` restricts the sum to that subset of entity rows so the
// training loop can take minibatched steps.
double loss_itc(const ParameterStore& params, const std::vector<ViewRef>& views,
                Gradients* grads, const std::vector<int>* rows = nullptr);

// A frozen view matrix for the late-combination strategies.
struct FixedView {
    const Tensor* matrix = nullptr;
    const std::vector<char>* mask = nullptr;
};

// sum_i ( || H~ - H(i) Z(i) ||_F^2 + || I - Z(i)^T Z(i) ||_F^2 ) with frozen
// views; trainable tensors are the combined matrix and the per-view maps.
double loss_ssl(const ParameterStore& params, const std::vector<FixedView>& views,
                Gradients* grads);

struct SslResult {
    Tensor combined;
    std::vector<Tensor> maps;
    std::vector<double> loss_curve;     // per epoch
    std::vector<double> orth_residuals; // || I - Z^T Z ||_F per view, final
};

// Full-batch AdaGrad minimization of loss_ssl. The combined matrix starts at
// the plain per-row view mean and every map at the identity.
SslResult train_shared_space(const std::vector<FixedView>& views, int epochs, double lr);

// || I - Z^T Z ||_F
double orthogonality_residual(const Tensor& z);

} // namespace multike

#endif
