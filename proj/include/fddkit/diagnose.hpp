#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "fddkit/signal.hpp"

namespace fddkit {

/// A set of component identifiers known to contain at least one faulty member.
/// Stored sorted and duplicate-free.
using ConflictSet = std::vector<std::string>;

/// A minimal hitting set over a conflict collection.
using Diagnosis = std::vector<std::string>;

namespace detail {

inline ConflictSet canonical_set(ConflictSet s) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

// a and b sorted; true iff a is a subset of b.
inline bool is_subset(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline bool intersects(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia == *ib) {
            return true;
        }
        if (*ia < *ib) {
            ++ia;
        } else {
            ++ib;
        }
    }
    return false;
}

// Canonical result order: by cardinality, then lexicographic.
inline void canonical_order(std::vector<Diagnosis>& out) {
    std::sort(out.begin(), out.end(), [](const Diagnosis& a, const Diagnosis& b) {
        if (a.size() != b.size()) {
            return a.size() < b.size();
        }
        return a < b;
    });
}

}  // namespace detail

/// One two-element conflict per alarmed pair, duplicates removed, input order
/// of first report preserved.
inline std::vector<ConflictSet> conflicts_at(const std::vector<SensorPair>& alarmed_pairs) {
    std::vector<ConflictSet> conflicts;
    for (const auto& p : alarmed_pairs) {
        ConflictSet c = detail::canonical_set({p.first, p.second});
        if (c.empty()) {
            continue;
        }
        if (std::find(conflicts.begin(), conflicts.end(), c) == conflicts.end()) {
            conflicts.push_back(std::move(c));
        }
    }
    return conflicts;
}

/// All minimal hitting sets of cardinality <= max_cardinality, via Reiter's
/// HS-DAG construction: breadth-first level expansion with node reuse and the
/// closing rule against already-checked nodes. Conflict sets are reduced to
/// the subset-minimal ones up front, which makes the lazy pruning rule for
/// supersets unnecessary; conflicts are selected as node labels in
/// first-reported order and children expand in sorted component order.
inline std::vector<Diagnosis> hs_dag(const std::vector<ConflictSet>& conflicts,
                                     std::size_t max_cardinality) {
    if (max_cardinality < 1) {
        throw std::invalid_argument("max_cardinality must be at least 1");
    }
    std::vector<ConflictSet> minimal;
    for (const auto& raw : conflicts) {
        ConflictSet c = detail::canonical_set(raw);
        if (c.empty()) {
            throw std::invalid_argument("conflict sets must be non-empty");
        }
        minimal.push_back(std::move(c));
    }
    // drop conflicts that are supersets of another conflict
    std::vector<ConflictSet> reduced;
    for (std::size_t i = 0; i < minimal.size(); ++i) {
        bool keep = true;
        for (std::size_t j = 0; j < minimal.size() && keep; ++j) {
            if (i == j) {
                continue;
            }
            if (detail::is_subset(minimal[j], minimal[i]) &&
                (minimal[j].size() < minimal[i].size() || j < i)) {
                keep = false;
            }
        }
        if (keep) {
            reduced.push_back(minimal[i]);
        }
    }

    std::vector<Diagnosis> results;
    std::set<std::vector<std::string>> generated;
    std::deque<std::vector<std::string>> queue;
    queue.push_back({});
    generated.insert({});

    while (!queue.empty()) {
        std::vector<std::string> h = queue.front();
        queue.pop_front();

        bool closed = false;
        for (const auto& r : results) {
            if (detail::is_subset(r, h)) {
                closed = true;
                break;
            }
        }
        if (closed) {
            continue;
        }

        const ConflictSet* label = nullptr;
        for (const auto& c : reduced) {
            if (!detail::intersects(c, h)) {
                label = &c;
                break;
            }
        }
        if (label == nullptr) {
            results.push_back(h);
            continue;
        }
        if (h.size() >= max_cardinality) {
            continue;
        }
        for (const auto& component : *label) {
            std::vector<std::string> child = h;
            child.insert(std::upper_bound(child.begin(), child.end(), component), component);
            if (generated.insert(child).second) {
                queue.push_back(std::move(child));
            }
        }
    }
    detail::canonical_order(results);
    return results;
}

/// Exact reference semantics by subset enumeration; the oracle hs_dag is
/// checked against. Limited to component universes of at most 20.
inline std::vector<Diagnosis> brute_force_hitting_sets(const std::vector<ConflictSet>& conflicts,
                                                       std::size_t max_cardinality) {
    if (max_cardinality < 1) {
        throw std::invalid_argument("max_cardinality must be at least 1");
    }
    std::vector<ConflictSet> canon;
    std::set<std::string> universe_set;
    for (const auto& raw : conflicts) {
        ConflictSet c = detail::canonical_set(raw);
        if (c.empty()) {
            throw std::invalid_argument("conflict sets must be non-empty");
        }
        universe_set.insert(c.begin(), c.end());
        canon.push_back(std::move(c));
    }
    if (universe_set.size() > 20) {
        throw std::invalid_argument("brute-force universe limited to 20 components");
    }
    const std::vector<std::string> universe(universe_set.begin(), universe_set.end());

    auto hits_all = [&canon](const std::vector<std::string>& candidate) {
        for (const auto& c : canon) {
            if (!detail::intersects(c, candidate)) {
                return false;
            }
        }
        return true;
    };

    std::vector<Diagnosis> results;
    // enumerate subsets by increasing cardinality so minimality filtering only
    // needs to look at already-kept sets
    for (std::size_t size = 0; size <= std::min(max_cardinality, universe.size()); ++size) {
        std::vector<bool> mask(universe.size(), false);
        std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(size), true);
        do {
            std::vector<std::string> candidate;
            candidate.reserve(size);
            for (std::size_t i = 0; i < universe.size(); ++i) {
                if (mask[i]) {
                    candidate.push_back(universe[i]);
                }
            }
            if (!hits_all(candidate)) {
                continue;
            }
            bool minimal_candidate = true;
            for (const auto& kept : results) {
                if (detail::is_subset(kept, candidate)) {
                    minimal_candidate = false;
                    break;
                }
            }
            if (minimal_candidate) {
                results.push_back(std::move(candidate));
            }
        } while (std::prev_permutation(mask.begin(), mask.end()));
    }
    detail::canonical_order(results);
    return results;
}

}  // namespace fddkit
