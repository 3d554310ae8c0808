#pragma once

// Turn-count rebalancing.
//
// Uniform construction: bin dialogues by maximum turn-count, select the
// non-empty bins whose key is at least t_min, take the smallest selected bin
// size as the quota q, then draw q dialogues without replacement from every
// selected bin. The result has exactly q * B' dialogues.
//
// Skewed subsampling keeps the source distribution: each bin receives its
// largest-remainder share of target_size, then draws that many dialogues.
//
// Bins are visited in ascending turn-count; each bin draws from its own
// SplitMix64 stream seeded by (seed, bin key).

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "turnkit/corpus.hpp"
#include "turnkit/errors.hpp"
#include "turnkit/random.hpp"

namespace turnkit::rebalance {

using corpus::Corpus;
using corpus::Dialogue;

struct BinningResult {
    std::map<int, std::vector<std::string>> bins;
    size_t total_n = 0;
    int t_min = 0;
    std::vector<int> selected;
    size_t quota = 0;

    size_t selected_count() const { return selected.size(); }
};

struct RebalanceConfig {
    int t_min = 4;
    uint64_t seed = 0;
    std::optional<size_t> target_size;
};

inline BinningResult bin_by_turn_count(const Corpus& corpus) {
    if (corpus.empty()) throw InvalidArgument("cannot bin an empty corpus");
    BinningResult result;
    result.total_n = corpus.size();
    for (const auto& d : corpus.dialogues) result.bins[corpus::max_turn_count(d)].push_back(d.id);
    return result;
}

/// Selects non-empty bins with key >= t_min and sets the quota to the smallest
/// of them. Bins sharing the minimum size are all kept.
inline size_t determine_quota(BinningResult& binning, int t_min) {
    if (t_min < 1) throw InvalidArgument("t_min must be >= 1");
    binning.t_min = t_min;
    binning.selected.clear();
    binning.quota = 0;
    for (const auto& [key, ids] : binning.bins) {
        if (key >= t_min && !ids.empty()) binning.selected.push_back(key);
    }
    if (binning.selected.empty())
        throw InvalidArgument("no non-empty bin has turn-count >= " + std::to_string(t_min));
    size_t q = binning.bins.at(binning.selected.front()).size();
    for (int key : binning.selected) q = std::min(q, binning.bins.at(key).size());
    binning.quota = q;
    return q;
}

namespace detail {

inline std::unordered_map<std::string, size_t> index_by_id(const Corpus& corpus) {
    std::unordered_map<std::string, size_t> index;
    index.reserve(corpus.size());
    for (size_t i = 0; i < corpus.size(); ++i) index.emplace(corpus.dialogues[i].id, i);
    return index;
}

inline void draw_from_bin(const Corpus& source, const std::unordered_map<std::string, size_t>& index,
                          int key, const std::vector<std::string>& ids, size_t count, uint64_t seed,
                          Corpus& out) {
    random::SplitMix64 rng(random::substream_seed(seed, static_cast<uint64_t>(key)));
    const auto picked = random::sample_without_replacement<std::string>(ids, count, rng);
    for (const auto& id : picked) out.dialogues.push_back(source.dialogues.at(index.at(id)));
}

}  // namespace detail

/// Requires determine_quota to have run on `binning` (built from `source`).
inline Corpus uniform_sample(const Corpus& source, const BinningResult& binning, const RebalanceConfig& config) {
    if (binning.selected.empty()) throw InvalidArgument("quota not determined");
    const auto index = detail::index_by_id(source);
    Corpus out;
    out.source = source.source;
    out.dialogues.reserve(binning.quota * binning.selected.size());
    for (int key : binning.selected) {
        const auto& ids = binning.bins.at(key);
        if (binning.quota > ids.size())
            throw InvalidArgument("quota exceeds size of bin " + std::to_string(key));
        detail::draw_from_bin(source, index, key, ids, binning.quota, config.seed, out);
    }
    return out;
}

/// Convenience wrapper running all four construction steps.
inline Corpus uniform_rebalance(const Corpus& source, const RebalanceConfig& config,
                                BinningResult* binning_out = nullptr) {
    auto binning = bin_by_turn_count(source);
    determine_quota(binning, config.t_min);
    auto out = uniform_sample(source, binning, config);
    if (binning_out) *binning_out = std::move(binning);
    return out;
}

/// Largest-remainder (Hamilton) apportionment of `target` seats over bins in
/// proportion to their counts. Remainders are compared exactly as integers;
/// ties go to the smaller turn-count.
inline std::map<int, size_t> largest_remainder(const corpus::Histogram& counts, size_t target) {
    const size_t total = corpus::histogram_total(counts);
    std::map<int, size_t> alloc;
    if (total == 0) {
        if (target != 0) throw InvalidArgument("cannot apportion over an empty histogram");
        return alloc;
    }
    struct Rem {
        int key;
        unsigned __int128 remainder;
    };
    std::vector<Rem> remainders;
    size_t assigned = 0;
    for (const auto& [key, count] : counts) {
        const auto scaled = static_cast<unsigned __int128>(target) * count;
        alloc[key] = static_cast<size_t>(scaled / total);
        assigned += alloc[key];
        remainders.push_back({key, scaled % total});
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const Rem& a, const Rem& b) { return a.remainder > b.remainder; });
    for (size_t i = 0; assigned < target; ++i, ++assigned) ++alloc[remainders.at(i).key];
    return alloc;
}

inline Corpus skewed_sample(const Corpus& source, const RebalanceConfig& config,
                            std::map<int, size_t>* allocation_out = nullptr) {
    if (!config.target_size) throw InvalidArgument("skewed sampling needs a target size");
    const size_t target = *config.target_size;
    if (target > source.size())
        throw InvalidArgument("target size " + std::to_string(target) + " exceeds corpus size " +
                              std::to_string(source.size()));
    Corpus out;
    out.source = source.source;
    if (source.empty()) return out;
    const auto binning = bin_by_turn_count(source);
    corpus::Histogram counts;
    for (const auto& [key, ids] : binning.bins) counts[key] = ids.size();
    const auto alloc = largest_remainder(counts, target);
    const auto index = detail::index_by_id(source);
    out.dialogues.reserve(target);
    for (const auto& [key, ids] : binning.bins)
        detail::draw_from_bin(source, index, key, ids, alloc.at(key), config.seed, out);
    if (allocation_out) *allocation_out = alloc;
    return out;
}

}  // namespace turnkit::rebalance
