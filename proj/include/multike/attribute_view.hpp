#ifndef MULTIKE_ATTRIBUTE_VIEW_HPP
#define MULTIKE_ATTRIBUTE_VIEW_HPP

#include <map>
#include <vector>

#include "multike/kg.hpp"
#include "multike/params.hpp"
#include "multike/soft_alignment.hpp"

namespace multike {

// parameter names of the attribute view inside a ParameterStore
inline constexpr const char* kAttrEnt = "ent3";    // n_entities x d
inline constexpr const char* kAttrAttr = "attr";   // n_attributes x d
inline constexpr const char* kAttrConv = "conv";   // n_filters x 2c, rows [attr part | value part]
inline constexpr const char* kAttrProj = "proj";   // n_filters*(d-c+1) x d
inline constexpr const char* kAttrProjB = "proj_b"; // 1 x d

// Attribute fact in index space; `value` indexes a row of the frozen
// value-embedding matrix built by the pipeline.
struct AttrTriple {
    int head;
    int attribute;
    int value;

    auto operator<=>(const AttrTriple&) const = default;
};

std::vector<AttrTriple> index_attribute_facts(const KnowledgeGraph& kg, Side side,
                                              const Vocabulary& vocab,
                                              const std::map<std::string, int>& value_index);

void init_attribute_cnn(ParameterStore& params, std::size_t d, std::size_t kernel_width,
                        std::size_t n_filters, Rng& rng);

// Stacks the attribute and value embeddings into a 2 x d matrix, slides each
// 2 x c kernel over it (valid, stride 1), applies tanh, flattens filter-major
// and projects through the dense layer with a second tanh.
std::vector<double> cnn_forward(const ParameterStore& params, std::span<const double> a,
                                std::span<const double> v);

// -|| h - cnn_forward(a, v) ||_2
double score_attr(const ParameterStore& params, std::span<const double> h,
                  std::span<const double> a, std::span<const double> v);
double score_attr(const ParameterStore& params, const AttrTriple& f, const Tensor& values);

// Sum of log(1 + exp(-score)) over the batch; attribute facts have no sampled
// negatives. Gradients reach the entity row, attribute row, kernels and dense
// layer; value embeddings are frozen inputs.
double loss_attribute_view(const ParameterStore& params, const std::vector<AttrTriple>& batch,
                           const Tensor& values, Gradients* grads);

// Counterpart substitution of aligned head entities, both directions.
double loss_cross_entity_attr(const ParameterStore& params,
                              const std::vector<AttrTriple>& facts,
                              const std::map<int, int>& seed, const Tensor& values,
                              Gradients* grads);

// Soft attribute-alignment loss, weighted counterpart substitution; weights
// are constants for backpropagation.
double loss_cross_attr_alignment(const ParameterStore& params,
                                 const std::vector<AttrTriple>& facts, const SoftMap& soft,
                                 const Tensor& values, Gradients* grads);

} // namespace multike

#endif
