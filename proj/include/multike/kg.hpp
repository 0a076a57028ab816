#ifndef MULTIKE_KG_HPP
#define MULTIKE_KG_HPP

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "multike/common.hpp"

namespace multike {

// One knowledge graph: id sets, the name view, and the two fact views.
// Facts are kept in ingestion order and deduplicated.
struct KnowledgeGraph {
    std::set<std::string> entities;
    std::set<std::string> relations;
    std::set<std::string> attributes;
    std::set<std::string> literals;
    std::map<std::string, std::string> name_view; // explicit labels only
    std::vector<std::array<std::string, 3>> relation_facts;
    std::vector<std::array<std::string, 3>> attribute_facts;

    // label if present, otherwise the URI local name
    std::string effective_name(const std::string& entity) const;

    bool operator==(const KnowledgeGraph&) const = default;
};

struct AlignmentDataset {
    KnowledgeGraph source;
    KnowledgeGraph target;
    std::vector<std::pair<std::string, std::string>> seed_alignment;
    std::vector<std::pair<std::string, std::string>> test_alignment;
};

enum class Side { A, B };

// Dense shared index spaces over both graphs: entities of A first (sorted),
// then entities of B; relations and attributes likewise.
class Vocabulary {
public:
    Vocabulary() = default;
    Vocabulary(const KnowledgeGraph& a, const KnowledgeGraph& b);

    int entity_count() const { return static_cast<int>(entity_ids_.size()); }
    int relation_count() const { return static_cast<int>(relation_ids_.size()); }
    int attribute_count() const { return static_cast<int>(attribute_ids_.size()); }

    int entity_index(Side side, const std::string& id) const;
    int relation_index(Side side, const std::string& id) const;
    int attribute_index(Side side, const std::string& id) const;

    const std::string& entity_id(int index) const { return entity_ids_.at(index); }
    const std::string& relation_id(int index) const { return relation_ids_.at(index); }
    const std::string& attribute_id(int index) const { return attribute_ids_.at(index); }

    Side entity_side(int index) const { return index < n_entities_a_ ? Side::A : Side::B; }
    Side relation_side(int index) const { return index < n_relations_a_ ? Side::A : Side::B; }
    Side attribute_side(int index) const { return index < n_attributes_a_ ? Side::A : Side::B; }

    // index ranges [first, last) per side
    std::pair<int, int> entity_range(Side side) const;
    std::pair<int, int> relation_range(Side side) const;
    std::pair<int, int> attribute_range(Side side) const;

private:
    std::map<std::string, int> ent_a_, ent_b_, rel_a_, rel_b_, attr_a_, attr_b_;
    std::vector<std::string> entity_ids_, relation_ids_, attribute_ids_;
    int n_entities_a_ = 0, n_relations_a_ = 0, n_attributes_a_ = 0;
};

// "..."^^type and "..."@lang are reduced to the plain lexical form
std::string normalize_literal(const std::string& raw);

// URI local name: the string after the last hash or slash, with underscores
// replaced by spaces and percent-encoding decoded. Plain strings fall back to
// themselves (after underscore replacement).
std::string extract_name(const std::string& id);

// TSV head<TAB>relation<TAB>tail; registers referenced ids into kg.
// Malformed lines raise ParseError with their line number.
std::vector<std::array<std::string, 3>> parse_relation_triples(const std::string& text,
                                                               KnowledgeGraph& kg);

// TSV head<TAB>attribute<TAB>value; the value is everything after the second
// tab and is normalized per normalize_literal before registration.
std::vector<std::array<std::string, 3>> parse_attribute_triples(const std::string& text,
                                                                KnowledgeGraph& kg);

// TSV entity<TAB>label; registers entities and fills kg.name_view.
void parse_names(const std::string& text, KnowledgeGraph& kg);

// TSV source<TAB>target reference pairs, validated against the two graphs.
std::vector<std::pair<std::string, std::string>> parse_entity_links(
    const std::string& text, const KnowledgeGraph& source, const KnowledgeGraph& target);

// Deterministic shuffle, then floor(ratio*n) pairs become seed, rest test.
std::pair<std::vector<std::pair<std::string, std::string>>,
          std::vector<std::pair<std::string, std::string>>>
split_alignment(std::vector<std::pair<std::string, std::string>> pairs, double seed_ratio,
                std::uint64_t rng_seed);

struct SyntheticSpec {
    int n_entities = 100;
    int n_relations = 10;
    int n_attributes = 8;
    double name_noise = 0.0;        // per-token probability of substitution in clone names
    double structure_dropout = 0.0; // per-cloned-fact drop probability
    std::uint64_t rng_seed = 1;
    int rel_facts_per_entity = 4;
    double attr_density = 0.6; // probability an (entity, attribute) pair has a fact
    int name_tokens = 3;
    int name_pool_words = 0; // distinct words available for names; 0 = 8 * n_entities
};

// Random base graph plus a perturbed clone; the reference alignment is the
// cloning bijection and is returned in test_alignment (no split applied).
AlignmentDataset generate_synthetic_pair(const SyntheticSpec& spec);

// Every word used by the generator's names and values, for word-vector dumps.
std::vector<std::string> synthetic_token_pool(const SyntheticSpec& spec);

struct DatasetFiles {
    std::string rel_triples_1, rel_triples_2;
    std::string attr_triples_1, attr_triples_2;
    std::string ent_links;
    std::string names_1, names_2;
};

DatasetFiles serialize_dataset(const AlignmentDataset& ds);
void write_dataset_dir(const AlignmentDataset& ds, const std::string& dir);

// Reads rel_triples_{1,2}, attr_triples_{1,2}, ent_links and optional
// names_{1,2}; all reference pairs land in test_alignment.
AlignmentDataset load_dataset_dir(const std::string& dir);

} // namespace multike

#endif
