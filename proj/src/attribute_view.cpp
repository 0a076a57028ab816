#include "multike/attribute_view.hpp"

#include <cmath>

namespace multike {

std::vector<AttrTriple> index_attribute_facts(const KnowledgeGraph& kg, Side side,
                                              const Vocabulary& vocab,
                                              const std::map<std::string, int>& value_index) {
    std::vector<AttrTriple> out;
    out.reserve(kg.attribute_facts.size());
    for (const auto& f : kg.attribute_facts) {
        auto it = value_index.find(f[2]);
        if (it == value_index.end())
            throw std::out_of_range("unknown attribute value literal: " + f[2]);
        out.push_back({vocab.entity_index(side, f[0]), vocab.attribute_index(side, f[1]),
                       it->second});
    }
    return out;
}

void init_attribute_cnn(ParameterStore& params, std::size_t d, std::size_t kernel_width,
                        std::size_t n_filters, Rng& rng) {
    if (kernel_width >= d)
        throw std::invalid_argument("init_attribute_cnn: kernel width must be < d");
    std::size_t feat = d - kernel_width + 1;
    params.add(kAttrConv, xavier_init(n_filters, 2 * kernel_width, rng));
    params.add(kAttrProj, xavier_init(n_filters * feat, d, rng));
    params.add(kAttrProjB, Tensor(1, d));
}

namespace {

struct CnnTrace {
    std::size_t c = 0, feat = 0, filters = 0, d = 0;
    std::vector<double> hidden; // tanh feature map, filter-major, filters*feat
    std::vector<double> out;    // final d-vector
};

CnnTrace cnn_trace(const ParameterStore& params, std::span<const double> a,
                   std::span<const double> v) {
    const Tensor& conv = params.at(kAttrConv);
    const Tensor& proj = params.at(kAttrProj);
    const Tensor& proj_b = params.at(kAttrProjB);
    if (a.size() != v.size())
        throw std::invalid_argument("cnn_forward: attribute/value dimension mismatch");

    CnnTrace tr;
    tr.d = a.size();
    tr.filters = conv.rows();
    tr.c = conv.cols() / 2;
    if (tr.c == 0 || tr.c >= tr.d)
        throw std::invalid_argument("cnn_forward: kernel width incompatible with dimension");
    tr.feat = tr.d - tr.c + 1;
    if (proj.rows() != tr.filters * tr.feat || proj.cols() != tr.d)
        throw std::invalid_argument("cnn_forward: projection shape mismatch");

    tr.hidden.resize(tr.filters * tr.feat);
    for (std::size_t f = 0; f < tr.filters; ++f) {
        auto kernel = conv.row(f); // first c weights on a, next c on v
        for (std::size_t p = 0; p < tr.feat; ++p) {
            double s = 0.0;
            for (std::size_t j = 0; j < tr.c; ++j)
                s += kernel[j] * a[p + j] + kernel[tr.c + j] * v[p + j];
            tr.hidden[f * tr.feat + p] = std::tanh(s);
        }
    }
    tr.out.resize(tr.d);
    for (std::size_t j = 0; j < tr.d; ++j) {
        double s = proj_b[j];
        for (std::size_t i = 0; i < tr.hidden.size(); ++i) s += tr.hidden[i] * proj.at(i, j);
        tr.out[j] = std::tanh(s);
    }
    return tr;
}

// Loss term weight * log(1+exp(-f_attr)) for one fact, with gradients for the
// entity row, attribute row, kernels, and dense layer when requested.
double attr_term(const ParameterStore& params, const AttrTriple& fact, double weight,
                 int attribute_override, const Tensor& values, Gradients* grads) {
    const Tensor& ent = params.at(kAttrEnt);
    const Tensor& attr = params.at(kAttrAttr);
    int a_idx = attribute_override >= 0 ? attribute_override : fact.attribute;
    auto h = ent.row(fact.head);
    auto a = attr.row(a_idx);
    auto v = values.row(fact.value);

    CnnTrace tr = cnn_trace(params, a, v);
    std::size_t d = tr.d;
    std::vector<double> u(d);
    for (std::size_t j = 0; j < d; ++j) u[j] = h[j] - tr.out[j];
    double dist = norm2(u);
    double score = -dist;
    double term = weight * log1pexp(-score);
    if (!grads) return term;

    // dL/dscore = -weight*sigmoid(-score); dscore/du = -u/dist
    double coef = weight * sigmoid(-score);
    std::vector<double> du(d, 0.0);
    if (dist > 0.0)
        for (std::size_t j = 0; j < d; ++j) du[j] = coef * u[j] / dist;

    auto gh = grads->row(kAttrEnt, fact.head);
    for (std::size_t j = 0; j < d; ++j) gh[j] += du[j];

    // CNN output receives -du
    const Tensor& proj = params.at(kAttrProj);
    std::vector<double> dpre_out(d);
    for (std::size_t j = 0; j < d; ++j)
        dpre_out[j] = -du[j] * (1.0 - tr.out[j] * tr.out[j]);

    Tensor& g_proj = grads->of(kAttrProj);
    Tensor& g_proj_b = grads->of(kAttrProjB);
    for (std::size_t i = 0; i < tr.hidden.size(); ++i)
        for (std::size_t j = 0; j < d; ++j) g_proj.at(i, j) += tr.hidden[i] * dpre_out[j];
    for (std::size_t j = 0; j < d; ++j) g_proj_b[j] += dpre_out[j];

    const Tensor& conv = params.at(kAttrConv);
    Tensor& g_conv = grads->of(kAttrConv);
    auto ga = grads->row(kAttrAttr, a_idx);
    for (std::size_t f = 0; f < tr.filters; ++f) {
        auto kernel = conv.row(f);
        auto g_kernel = g_conv.row(f);
        for (std::size_t p = 0; p < tr.feat; ++p) {
            double hid = tr.hidden[f * tr.feat + p];
            double dz = 0.0;
            for (std::size_t j = 0; j < d; ++j) dz += dpre_out[j] * proj.at(f * tr.feat + p, j);
            double dpre = dz * (1.0 - hid * hid);
            for (std::size_t j = 0; j < tr.c; ++j) {
                g_kernel[j] += dpre * a[p + j];
                g_kernel[tr.c + j] += dpre * v[p + j];
                ga[p + j] += dpre * kernel[j];
            }
        }
    }
    return term;
}

} // namespace

std::vector<double> cnn_forward(const ParameterStore& params, std::span<const double> a,
                                std::span<const double> v) {
    return cnn_trace(params, a, v).out;
}

double score_attr(const ParameterStore& params, std::span<const double> h,
                  std::span<const double> a, std::span<const double> v) {
    auto out = cnn_forward(params, a, v);
    double acc = 0.0;
    for (std::size_t j = 0; j < out.size(); ++j) {
        double u = h[j] - out[j];
        acc += u * u;
    }
    return -std::sqrt(acc);
}

double score_attr(const ParameterStore& params, const AttrTriple& f, const Tensor& values) {
    return score_attr(params, params.at(kAttrEnt).row(f.head),
                      params.at(kAttrAttr).row(f.attribute), values.row(f.value));
}

double loss_attribute_view(const ParameterStore& params, const std::vector<AttrTriple>& batch,
                           const Tensor& values, Gradients* grads) {
    double loss = 0.0;
    for (const auto& f : batch) loss += attr_term(params, f, 1.0, -1, values, grads);
    return loss;
}

double loss_cross_entity_attr(const ParameterStore& params,
                              const std::vector<AttrTriple>& facts,
                              const std::map<int, int>& seed, const Tensor& values,
                              Gradients* grads) {
    double loss = 0.0;
    for (const auto& f : facts) {
        auto it = seed.find(f.head);
        if (it == seed.end()) continue;
        AttrTriple swapped{it->second, f.attribute, f.value};
        loss += attr_term(params, swapped, 1.0, -1, values, grads);
    }
    return loss;
}

double loss_cross_attr_alignment(const ParameterStore& params,
                                 const std::vector<AttrTriple>& facts, const SoftMap& soft,
                                 const Tensor& values, Gradients* grads) {
    double loss = 0.0;
    for (const auto& f : facts) {
        auto it = soft.find(f.attribute);
        if (it == soft.end()) continue;
        for (const auto& [counterpart, weight] : it->second)
            loss += attr_term(params, f, weight, counterpart, values, grads);
    }
    return loss;
}

} // namespace multike
