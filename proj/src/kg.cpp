#include "multike/kg.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>

namespace fs = std::filesystem;

namespace multike {

std::string KnowledgeGraph::effective_name(const std::string& entity) const {
    auto it = name_view.find(entity);
    if (it != name_view.end()) return it->second;
    return extract_name(entity);
}

Vocabulary::Vocabulary(const KnowledgeGraph& a, const KnowledgeGraph& b) {
    auto index_all = [](const std::set<std::string>& first, const std::set<std::string>& second,
                        std::map<std::string, int>& map_a, std::map<std::string, int>& map_b,
                        std::vector<std::string>& ids) {
        for (const auto& id : first) {
            map_a[id] = static_cast<int>(ids.size());
            ids.push_back(id);
        }
        int split = static_cast<int>(ids.size());
        for (const auto& id : second) {
            map_b[id] = static_cast<int>(ids.size());
            ids.push_back(id);
        }
        return split;
    };
    n_entities_a_ = index_all(a.entities, b.entities, ent_a_, ent_b_, entity_ids_);
    n_relations_a_ = index_all(a.relations, b.relations, rel_a_, rel_b_, relation_ids_);
    n_attributes_a_ = index_all(a.attributes, b.attributes, attr_a_, attr_b_, attribute_ids_);
}

static int lookup_index(const std::map<std::string, int>& m, const std::string& id,
                        const char* what) {
    auto it = m.find(id);
    if (it == m.end()) throw std::out_of_range(std::string("unknown ") + what + ": " + id);
    return it->second;
}

int Vocabulary::entity_index(Side side, const std::string& id) const {
    return lookup_index(side == Side::A ? ent_a_ : ent_b_, id, "entity");
}

int Vocabulary::relation_index(Side side, const std::string& id) const {
    return lookup_index(side == Side::A ? rel_a_ : rel_b_, id, "relation");
}

int Vocabulary::attribute_index(Side side, const std::string& id) const {
    return lookup_index(side == Side::A ? attr_a_ : attr_b_, id, "attribute");
}

std::pair<int, int> Vocabulary::entity_range(Side side) const {
    return side == Side::A ? std::pair{0, n_entities_a_}
                           : std::pair{n_entities_a_, entity_count()};
}

std::pair<int, int> Vocabulary::relation_range(Side side) const {
    return side == Side::A ? std::pair{0, n_relations_a_}
                           : std::pair{n_relations_a_, relation_count()};
}

std::pair<int, int> Vocabulary::attribute_range(Side side) const {
    return side == Side::A ? std::pair{0, n_attributes_a_}
                           : std::pair{n_attributes_a_, attribute_count()};
}

std::string normalize_literal(const std::string& raw) {
    std::string v = trim(raw);
    auto caret = v.rfind("^^");
    if (caret != std::string::npos) v = v.substr(0, caret);
    if (v.size() >= 2 && v.front() == '"') {
        auto close = v.rfind('"');
        if (close > 0 && (close == v.size() - 1 || v[close + 1] == '@'))
            return v.substr(1, close - 1);
    }
    return v;
}

std::string extract_name(const std::string& id) {
    auto pos = id.find_last_of("#/");
    std::string local = pos == std::string::npos ? id : id.substr(pos + 1);
    if (local.empty()) return id;
    std::replace(local.begin(), local.end(), '_', ' ');
    return percent_decode(local);
}

namespace {

// splits file content into lines, tolerating a trailing newline and CR
std::vector<std::string> content_lines(const std::string& text) {
    std::vector<std::string> lines = split(text, '\n');
    if (!lines.empty() && lines.back().empty()) lines.pop_back();
    for (auto& line : lines)
        if (!line.empty() && line.back() == '\r') line.pop_back();
    return lines;
}

} // namespace

std::vector<std::array<std::string, 3>> parse_relation_triples(const std::string& text,
                                                               KnowledgeGraph& kg) {
    std::vector<std::array<std::string, 3>> facts;
    std::set<std::array<std::string, 3>> seen(kg.relation_facts.begin(),
                                              kg.relation_facts.end());
    auto lines = content_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto fields = split(lines[i], '\t');
        if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty())
            throw ParseError("expected head<TAB>relation<TAB>tail, got \"" + lines[i] + "\"",
                             i + 1);
        std::array<std::string, 3> fact{fields[0], fields[1], fields[2]};
        if (!seen.insert(fact).second) continue;
        kg.entities.insert(fact[0]);
        kg.relations.insert(fact[1]);
        kg.entities.insert(fact[2]);
        kg.relation_facts.push_back(fact);
        facts.push_back(std::move(fact));
    }
    return facts;
}

std::vector<std::array<std::string, 3>> parse_attribute_triples(const std::string& text,
                                                                KnowledgeGraph& kg) {
    std::vector<std::array<std::string, 3>> facts;
    std::set<std::array<std::string, 3>> seen(kg.attribute_facts.begin(),
                                              kg.attribute_facts.end());
    auto lines = content_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto first = lines[i].find('\t');
        auto second = first == std::string::npos ? std::string::npos
                                                 : lines[i].find('\t', first + 1);
        if (second == std::string::npos)
            throw ParseError("expected head<TAB>attribute<TAB>value, got \"" + lines[i] + "\"",
                             i + 1);
        std::string head = lines[i].substr(0, first);
        std::string attr = lines[i].substr(first + 1, second - first - 1);
        std::string value = normalize_literal(lines[i].substr(second + 1));
        if (head.empty() || attr.empty() || value.empty())
            throw ParseError("empty field in attribute triple \"" + lines[i] + "\"", i + 1);
        std::array<std::string, 3> fact{std::move(head), std::move(attr), std::move(value)};
        if (!seen.insert(fact).second) continue;
        kg.entities.insert(fact[0]);
        kg.attributes.insert(fact[1]);
        kg.literals.insert(fact[2]);
        kg.attribute_facts.push_back(fact);
        facts.push_back(std::move(fact));
    }
    return facts;
}

void parse_names(const std::string& text, KnowledgeGraph& kg) {
    auto lines = content_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto tab = lines[i].find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 >= lines[i].size())
            throw ParseError("expected entity<TAB>label, got \"" + lines[i] + "\"", i + 1);
        std::string entity = lines[i].substr(0, tab);
        std::string label = normalize_literal(lines[i].substr(tab + 1));
        kg.entities.insert(entity);
        kg.name_view[entity] = label;
        kg.literals.insert(label);
    }
}

std::vector<std::pair<std::string, std::string>> parse_entity_links(
    const std::string& text, const KnowledgeGraph& source, const KnowledgeGraph& target) {
    std::vector<std::pair<std::string, std::string>> pairs;
    std::map<std::string, std::string> by_source, by_target;
    auto lines = content_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto fields = split(lines[i], '\t');
        if (fields.size() != 2 || fields[0].empty() || fields[1].empty())
            throw ParseError("expected source<TAB>target, got \"" + lines[i] + "\"", i + 1);
        if (!source.entities.count(fields[0]))
            throw ParseError("unknown source entity: " + fields[0], i + 1);
        if (!target.entities.count(fields[1]))
            throw ParseError("unknown target entity: " + fields[1], i + 1);
        auto s = by_source.find(fields[0]);
        if (s != by_source.end()) {
            if (s->second == fields[1]) continue; // exact duplicate line
            throw ParseError("source entity in more than one pair: " + fields[0], i + 1);
        }
        auto t = by_target.find(fields[1]);
        if (t != by_target.end())
            throw ParseError("target entity in more than one pair: " + fields[1], i + 1);
        by_source[fields[0]] = fields[1];
        by_target[fields[1]] = fields[0];
        pairs.emplace_back(fields[0], fields[1]);
    }
    return pairs;
}

std::pair<std::vector<std::pair<std::string, std::string>>,
          std::vector<std::pair<std::string, std::string>>>
split_alignment(std::vector<std::pair<std::string, std::string>> pairs, double seed_ratio,
                std::uint64_t rng_seed) {
    if (seed_ratio < 0.0 || seed_ratio > 1.0)
        throw std::invalid_argument("seed_ratio must be in [0,1]");
    Rng rng(rng_seed);
    rng.shuffle(pairs);
    std::size_t n_seed = static_cast<std::size_t>(seed_ratio * static_cast<double>(pairs.size()));
    std::vector<std::pair<std::string, std::string>> seed(pairs.begin(),
                                                          pairs.begin() + n_seed);
    std::vector<std::pair<std::string, std::string>> test(pairs.begin() + n_seed, pairs.end());
    return {std::move(seed), std::move(test)};
}

namespace {

// pronounceable unique words, deterministic under the rng
std::vector<std::string> make_word_pool(std::size_t count, Rng& rng) {
    static const char* consonants = "bdfgklmnprstvz";
    static const char* vowels = "aeiou";
    std::set<std::string> seen;
    std::vector<std::string> pool;
    pool.reserve(count);
    while (pool.size() < count) {
        std::size_t syllables = 2 + rng.index(3);
        std::string w;
        for (std::size_t s = 0; s < syllables; ++s) {
            w.push_back(consonants[rng.index(14)]);
            w.push_back(vowels[rng.index(5)]);
        }
        if (seen.insert(w).second) pool.push_back(std::move(w));
    }
    return pool;
}

struct SyntheticPools {
    std::vector<std::string> name_words;
    std::vector<std::string> value_words;
    std::vector<std::string> relation_words;
    std::vector<std::string> attribute_words;
};

SyntheticPools make_pools(const SyntheticSpec& spec) {
    Rng rng(Rng::derive(spec.rng_seed, 0x706f6f6c)); // "pool"
    std::size_t n = static_cast<std::size_t>(spec.n_entities);
    std::size_t name_words = spec.name_pool_words > 0
                                 ? static_cast<std::size_t>(spec.name_pool_words)
                                 : 8 * n;
    SyntheticPools pools;
    std::size_t total = name_words + 4 * n + static_cast<std::size_t>(spec.n_relations) +
                        static_cast<std::size_t>(spec.n_attributes);
    auto all = make_word_pool(total, rng);
    auto cut = all.begin();
    pools.name_words.assign(cut, cut + name_words);
    cut += name_words;
    pools.value_words.assign(cut, cut + 4 * n);
    cut += 4 * n;
    pools.relation_words.assign(cut, cut + spec.n_relations);
    cut += spec.n_relations;
    pools.attribute_words.assign(cut, cut + spec.n_attributes);
    return pools;
}

std::string entity_uri(char side, int i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "http://kg-%c.example.org/entity/e%04d", side, i);
    return buf;
}

} // namespace

std::vector<std::string> synthetic_token_pool(const SyntheticSpec& spec) {
    auto pools = make_pools(spec);
    std::vector<std::string> all;
    all.insert(all.end(), pools.name_words.begin(), pools.name_words.end());
    all.insert(all.end(), pools.value_words.begin(), pools.value_words.end());
    all.insert(all.end(), pools.relation_words.begin(), pools.relation_words.end());
    all.insert(all.end(), pools.attribute_words.begin(), pools.attribute_words.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    return all;
}

AlignmentDataset generate_synthetic_pair(const SyntheticSpec& spec) {
    if (spec.n_entities < 2)
        throw std::invalid_argument("generate_synthetic_pair: need at least 2 entities");
    auto pools = make_pools(spec);
    Rng rng(Rng::derive(spec.rng_seed, 0x67656e)); // "gen"

    AlignmentDataset ds;
    int n = spec.n_entities;

    // unique multi-token entity names
    std::set<std::string> used_names;
    std::vector<std::string> names(n);
    for (int i = 0; i < n; ++i) {
        std::string name;
        do {
            name.clear();
            for (int t = 0; t < spec.name_tokens; ++t) {
                if (t) name.push_back(' ');
                name += pools.name_words[rng.index(pools.name_words.size())];
            }
        } while (!used_names.insert(name).second);
        names[i] = name;
    }

    std::vector<std::string> ents_a(n), ents_b(n);
    for (int i = 0; i < n; ++i) {
        ents_a[i] = entity_uri('a', i);
        ents_b[i] = entity_uri('b', i);
        ds.source.entities.insert(ents_a[i]);
        ds.target.entities.insert(ents_b[i]);
        ds.source.name_view[ents_a[i]] = names[i];
        ds.source.literals.insert(names[i]);
        ds.test_alignment.emplace_back(ents_a[i], ents_b[i]);
    }

    // clone names, substituting each token with probability name_noise
    for (int i = 0; i < n; ++i) {
        auto tokens = split(names[i], ' ');
        std::string name;
        for (std::size_t t = 0; t < tokens.size(); ++t) {
            if (rng.bernoulli(spec.name_noise)) {
                std::string replacement;
                do {
                    replacement = pools.name_words[rng.index(pools.name_words.size())];
                } while (replacement == tokens[t]);
                tokens[t] = replacement;
            }
            if (t) name.push_back(' ');
            name += tokens[t];
        }
        ds.target.name_view[ents_b[i]] = name;
        ds.target.literals.insert(name);
    }

    std::vector<std::string> rels_a(spec.n_relations), rels_b(spec.n_relations);
    for (int k = 0; k < spec.n_relations; ++k) {
        rels_a[k] = "http://kg-a.example.org/relation/" + pools.relation_words[k];
        rels_b[k] = "http://kg-b.example.org/relation/" + pools.relation_words[k];
    }
    std::vector<std::string> attrs_a(spec.n_attributes), attrs_b(spec.n_attributes);
    for (int k = 0; k < spec.n_attributes; ++k) {
        attrs_a[k] = "http://kg-a.example.org/attribute/" + pools.attribute_words[k];
        attrs_b[k] = "http://kg-b.example.org/attribute/" + pools.attribute_words[k];
    }

    // relation facts on the base graph, then the surviving clones
    std::set<std::array<int, 3>> rel_seen;
    for (int i = 0; i < n; ++i) {
        for (int f = 0; f < spec.rel_facts_per_entity; ++f) {
            int r = static_cast<int>(rng.index(static_cast<std::size_t>(spec.n_relations)));
            int j = static_cast<int>(rng.index(static_cast<std::size_t>(n - 1)));
            if (j >= i) ++j;
            if (!rel_seen.insert({i, r, j}).second) continue;
            ds.source.relation_facts.push_back({ents_a[i], rels_a[r], ents_a[j]});
            ds.source.relations.insert(rels_a[r]);
            if (!rng.bernoulli(spec.structure_dropout)) {
                ds.target.relation_facts.push_back({ents_b[i], rels_b[r], ents_b[j]});
                ds.target.relations.insert(rels_b[r]);
            }
        }
    }

    // attribute facts; values are cloned verbatim
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < spec.n_attributes; ++k) {
            if (!rng.bernoulli(spec.attr_density)) continue;
            std::string value = pools.value_words[rng.index(pools.value_words.size())] + " " +
                                pools.value_words[rng.index(pools.value_words.size())];
            ds.source.attribute_facts.push_back({ents_a[i], attrs_a[k], value});
            ds.source.attributes.insert(attrs_a[k]);
            ds.source.literals.insert(value);
            if (!rng.bernoulli(spec.structure_dropout)) {
                ds.target.attribute_facts.push_back({ents_b[i], attrs_b[k], value});
                ds.target.attributes.insert(attrs_b[k]);
                ds.target.literals.insert(value);
            }
        }
    }
    return ds;
}

namespace {

std::string facts_to_tsv(const std::vector<std::array<std::string, 3>>& facts) {
    std::string out;
    for (const auto& f : facts) {
        out += f[0];
        out.push_back('\t');
        out += f[1];
        out.push_back('\t');
        out += f[2];
        out.push_back('\n');
    }
    return out;
}

std::string names_to_tsv(const std::map<std::string, std::string>& names) {
    std::string out;
    for (const auto& [ent, label] : names) {
        out += ent;
        out.push_back('\t');
        out += label;
        out.push_back('\n');
    }
    return out;
}

} // namespace

DatasetFiles serialize_dataset(const AlignmentDataset& ds) {
    DatasetFiles files;
    files.rel_triples_1 = facts_to_tsv(ds.source.relation_facts);
    files.rel_triples_2 = facts_to_tsv(ds.target.relation_facts);
    files.attr_triples_1 = facts_to_tsv(ds.source.attribute_facts);
    files.attr_triples_2 = facts_to_tsv(ds.target.attribute_facts);
    files.names_1 = names_to_tsv(ds.source.name_view);
    files.names_2 = names_to_tsv(ds.target.name_view);
    std::string links;
    for (const auto& [s, t] : ds.seed_alignment) links += s + "\t" + t + "\n";
    for (const auto& [s, t] : ds.test_alignment) links += s + "\t" + t + "\n";
    files.ent_links = links;
    return files;
}

void write_dataset_dir(const AlignmentDataset& ds, const std::string& dir) {
    fs::create_directories(dir);
    DatasetFiles files = serialize_dataset(ds);
    write_file((fs::path(dir) / "rel_triples_1").string(), files.rel_triples_1);
    write_file((fs::path(dir) / "rel_triples_2").string(), files.rel_triples_2);
    write_file((fs::path(dir) / "attr_triples_1").string(), files.attr_triples_1);
    write_file((fs::path(dir) / "attr_triples_2").string(), files.attr_triples_2);
    write_file((fs::path(dir) / "ent_links").string(), files.ent_links);
    write_file((fs::path(dir) / "names_1").string(), files.names_1);
    write_file((fs::path(dir) / "names_2").string(), files.names_2);
}

AlignmentDataset load_dataset_dir(const std::string& dir) {
    auto path = [&dir](const char* name) { return (fs::path(dir) / name).string(); };
    auto require = [&](const char* name) {
        if (!fs::exists(fs::path(dir) / name))
            throw std::runtime_error("missing dataset file: " + path(name));
        return read_file(path(name));
    };
    AlignmentDataset ds;
    parse_relation_triples(require("rel_triples_1"), ds.source);
    parse_relation_triples(require("rel_triples_2"), ds.target);
    parse_attribute_triples(require("attr_triples_1"), ds.source);
    parse_attribute_triples(require("attr_triples_2"), ds.target);
    if (fs::exists(fs::path(dir) / "names_1")) parse_names(read_file(path("names_1")), ds.source);
    if (fs::exists(fs::path(dir) / "names_2")) parse_names(read_file(path("names_2")), ds.target);
    ds.test_alignment = parse_entity_links(require("ent_links"), ds.source, ds.target);
    return ds;
}

} // namespace multike
