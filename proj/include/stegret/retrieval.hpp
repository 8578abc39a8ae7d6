#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "stegret/error.hpp"
#include "stegret/image_io.hpp"
#include "stegret/semantics.hpp"
#include "stegret/stego.hpp"

namespace stegret {

constexpr const char* kManifestFilename = "stegret-index.v1";

struct IndexEntry {
    std::string path; // relative to the indexed directory
    int width = 0;
    int height = 0;
    bool payload_present = false;
};

struct IndexManifest {
    int format_version = 1;
    std::vector<IndexEntry> entries;
};

/// Scan outcome: the manifest plus per-file failures (unreadable or
/// malformed rasters are recorded and skipped, never fatal).
struct IndexReport {
    IndexManifest manifest;
    std::vector<std::pair<std::string, std::string>> failures;
};

namespace retrieval_detail {

inline std::vector<std::filesystem::path> list_rasters(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(dir, ec))
        raise(Errc::io_failure, "not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = semantics_detail::lower(entry.path().extension().string());
        if (ext == ".png" || ext == ".bmp") files.push_back(entry.path());
    }
    if (ec)
        raise(Errc::io_failure, "cannot scan: " + dir.string());
    std::sort(files.begin(), files.end());
    return files;
}

} // namespace retrieval_detail

/// Scans a directory of lossless rasters, probes each for a payload header
/// (no keys needed), and writes the manifest file into the directory. The
/// manifest caches only non-secret facts; semantics stay inside the images.
inline IndexReport index_directory(const std::filesystem::path& dir) {
    IndexReport report;
    for (const auto& file : retrieval_detail::list_rasters(dir)) {
        const std::string rel = file.filename().string();
        try {
            const ImageRaster raster = load_image(file);
            report.manifest.entries.push_back(
                IndexEntry{rel, raster.width, raster.height, has_payload_header(raster)});
        } catch (const Error& e) {
            report.failures.emplace_back(rel, e.what());
        }
    }

    std::ofstream out(dir / kManifestFilename, std::ios::trunc);
    if (!out)
        raise(Errc::io_failure, "cannot write manifest in " + dir.string());
    out << "stegret-index 1\n";
    for (const auto& e : report.manifest.entries)
        out << e.path << '\t' << e.width << '\t' << e.height << '\t'
            << (e.payload_present ? 1 : 0) << '\n';
    if (!out)
        raise(Errc::io_failure, "manifest write failed in " + dir.string());
    return report;
}

inline IndexManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        raise(Errc::io_failure, "cannot open manifest: " + path.string());
    std::string line;
    if (!std::getline(in, line) || semantics_detail::trim(line) != "stegret-index 1")
        raise(Errc::parse_error, path.string() + ": not a stegret index");
    IndexManifest manifest;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (semantics_detail::trim(line).empty()) continue;
        std::istringstream ss(line);
        IndexEntry e;
        std::string flag;
        if (!std::getline(ss, e.path, '\t'))
            raise(Errc::parse_error, path.string() + ": line " + std::to_string(line_no));
        std::string w, h;
        if (!std::getline(ss, w, '\t') || !std::getline(ss, h, '\t') || !std::getline(ss, flag))
            raise(Errc::parse_error, path.string() + ": line " + std::to_string(line_no));
        try {
            e.width = std::stoi(w);
            e.height = std::stoi(h);
        } catch (const std::exception&) {
            raise(Errc::parse_error, path.string() + ": line " + std::to_string(line_no));
        }
        e.payload_present = flag == "1";
        manifest.entries.push_back(std::move(e));
    }
    return manifest;
}

// ---------------------------------------------------------------------------
// Scoring and tiered ranking.

/// Fraction of the expanded query's weight covered by the record's terms:
/// sum of weights of matched query terms over the total query weight. The
/// record's term set is its class label, keywords, and whitespace-tokenized
/// description, all lowercased.
inline double score(const SemanticRecord& rec, const ExpandedQuery& q) {
    using namespace semantics_detail;
    if (q.weights.empty())
        raise(Errc::empty_query, "cannot score against an empty query");
    std::vector<std::string> terms;
    terms.push_back(lower(rec.class_label));
    for (const auto& kw : rec.keywords) terms.push_back(lower(kw));
    std::istringstream ss(lower(rec.description));
    std::string tok;
    while (ss >> tok) terms.push_back(tok);

    double matched = 0.0;
    for (const auto& [term, w] : q.weights)
        if (std::find(terms.begin(), terms.end(), term) != terms.end()) matched += w;
    return matched / q.total_weight();
}

/// Tier thresholds and caps. Defaults: high >= 0.75, medium >= 0.40,
/// keep >= 0.05. max_per_tier of 0 means uncapped.
struct RetrievalPrefs {
    double high_threshold = 0.75;
    double medium_threshold = 0.40;
    double min_score = 0.05;
    std::size_t max_per_tier = 0;

    void validate() const {
        if (!(0.0 <= min_score && min_score < medium_threshold &&
              medium_threshold < high_threshold && high_threshold <= 1.0))
            raise(Errc::parse_error,
                  "tier thresholds must satisfy 0 <= min < medium < high <= 1");
    }
};

struct RankedEntry {
    std::string path;
    double score = 0.0;
    SemanticRecord record;
};

/// Three disjoint tiers, each sorted by score descending then path ascending.
struct RankedResults {
    std::vector<RankedEntry> high;
    std::vector<RankedEntry> medium;
    std::vector<RankedEntry> low;

    std::size_t total() const { return high.size() + medium.size() + low.size(); }
};

struct QueryOutcome {
    RankedResults results;
    // Per-image extraction failures: a corpus may legitimately mix keys, so
    // these are skips, not errors.
    std::vector<std::pair<std::string, std::string>> skipped;
};

namespace retrieval_detail {

inline void place(RankedResults& results, RankedEntry entry, const RetrievalPrefs& prefs) {
    if (entry.score <= 0.0 || entry.score < prefs.min_score) return;
    if (entry.score >= prefs.high_threshold)
        results.high.push_back(std::move(entry));
    else if (entry.score >= prefs.medium_threshold)
        results.medium.push_back(std::move(entry));
    else
        results.low.push_back(std::move(entry));
}

inline void finalize(RankedResults& results, const RetrievalPrefs& prefs) {
    const auto order = [](const RankedEntry& a, const RankedEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.path < b.path;
    };
    for (auto* tier : {&results.high, &results.medium, &results.low}) {
        std::sort(tier->begin(), tier->end(), order);
        if (prefs.max_per_tier != 0 && tier->size() > prefs.max_per_tier)
            tier->resize(prefs.max_per_tier);
    }
}

inline std::vector<IndexEntry> entries_for_query(const std::filesystem::path& dir) {
    if (std::filesystem::exists(dir / kManifestFilename))
        return load_manifest(dir / kManifestFilename).entries;
    std::vector<IndexEntry> entries;
    for (const auto& file : list_rasters(dir))
        entries.push_back(IndexEntry{file.filename().string(), 0, 0, true});
    return entries;
}

} // namespace retrieval_detail

/// Keyed query over a stego corpus: extract each payload-bearing entry's
/// record, score it against the expanded query, and partition into tiers.
/// Uses the directory's manifest when present, otherwise scans on the fly.
inline QueryOutcome query(const std::filesystem::path& dir,
                          const std::vector<std::string>& terms, const EncryptionKey& ek,
                          const StegoKey& sk, const EmbedConfig& cfg, const Ontology& onto,
                          const RetrievalPrefs& prefs = {}) {
    prefs.validate();
    const ExpandedQuery q = expand_query(terms, onto);
    QueryOutcome outcome;
    for (const auto& entry : retrieval_detail::entries_for_query(dir)) {
        if (!entry.payload_present) continue;
        try {
            const ImageRaster raster = load_image(dir / entry.path);
            const SemanticRecord rec = esha_extract(raster, ek, sk, cfg);
            retrieval_detail::place(outcome.results,
                                    RankedEntry{entry.path, score(rec, q), rec}, prefs);
        } catch (const Error& e) {
            outcome.skipped.emplace_back(entry.path, e.what());
        }
    }
    retrieval_detail::finalize(outcome.results, prefs);
    return outcome;
}

// ---------------------------------------------------------------------------
// Timing comparison: embedded-semantics retrieval versus recomputing image
// features for every image at query time.

struct TimingReport {
    double extract_seconds = 0.0;
    double recompute_seconds = 0.0;
    double ratio = 0.0; // recompute / extract
    std::size_t image_count = 0;
};

/// Measures (a) the extraction-based query path and (b) a path that
/// re-extracts a FeatureVector and classifies every image per query. When no
/// centroid table is supplied, one is trained up front (untimed) from the
/// corpus's own embedded labels, standing in for an offline-trained model.
/// Each path runs `repetitions` times and reports its best wall time.
inline TimingReport timing_bench(const std::filesystem::path& dir,
                                 const std::vector<std::string>& terms,
                                 const EncryptionKey& ek, const StegoKey& sk,
                                 const EmbedConfig& cfg, const Ontology& onto,
                                 CentroidTable centroids = {}, int repetitions = 3) {
    using clock = std::chrono::steady_clock;
    const RetrievalPrefs prefs;
    const ExpandedQuery q = expand_query(terms, onto);
    const auto entries = retrieval_detail::entries_for_query(dir);

    if (centroids.empty()) {
        std::map<std::string, std::pair<FeatureVector, std::size_t>> sums;
        for (const auto& entry : entries) {
            if (!entry.payload_present) continue;
            try {
                const ImageRaster raster = load_image(dir / entry.path);
                const SemanticRecord rec = esha_extract(raster, ek, sk, cfg);
                const FeatureVector fv = extract_features(raster, cfg.edge_params);
                auto& [sum, count] = sums[rec.class_label];
                for (std::size_t i = 0; i < kFeatureDim; ++i) sum.values[i] += fv.values[i];
                ++count;
            } catch (const Error&) {
                continue;
            }
        }
        for (auto& [label, acc] : sums) {
            for (std::size_t i = 0; i < kFeatureDim; ++i)
                acc.first.values[i] /= static_cast<double>(acc.second);
            centroids[label] = acc.first;
        }
        if (centroids.empty())
            raise(Errc::no_centroids, "no extractable records to bootstrap centroids from");
    }

    TimingReport report;
    report.image_count = entries.size();
    repetitions = std::max(repetitions, 1);

    for (int rep = 0; rep < repetitions; ++rep) {
        const auto t0 = clock::now();
        RankedResults via_extraction;
        for (const auto& entry : entries) {
            if (!entry.payload_present) continue;
            try {
                const ImageRaster raster = load_image(dir / entry.path);
                const SemanticRecord rec = esha_extract(raster, ek, sk, cfg);
                retrieval_detail::place(via_extraction,
                                        RankedEntry{entry.path, score(rec, q), rec}, prefs);
            } catch (const Error&) {
                continue;
            }
        }
        retrieval_detail::finalize(via_extraction, prefs);
        const double elapsed = std::chrono::duration<double>(clock::now() - t0).count();
        if (rep == 0 || elapsed < report.extract_seconds) report.extract_seconds = elapsed;
    }

    for (int rep = 0; rep < repetitions; ++rep) {
        const auto t0 = clock::now();
        RankedResults via_recompute;
        for (const auto& entry : entries) {
            try {
                const ImageRaster raster = load_image(dir / entry.path);
                const SemanticRecord rec =
                    annotate_image(raster, centroids, onto, cfg.edge_params);
                retrieval_detail::place(via_recompute,
                                        RankedEntry{entry.path, score(rec, q), rec}, prefs);
            } catch (const Error&) {
                continue;
            }
        }
        retrieval_detail::finalize(via_recompute, prefs);
        const double elapsed = std::chrono::duration<double>(clock::now() - t0).count();
        if (rep == 0 || elapsed < report.recompute_seconds) report.recompute_seconds = elapsed;
    }

    report.ratio = report.extract_seconds > 0.0
                       ? report.recompute_seconds / report.extract_seconds
                       : 0.0;
    return report;
}

} // namespace stegret
