#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stegret/edges.hpp"
#include "stegret/error.hpp"
#include "stegret/image.hpp"
#include "stegret/image_io.hpp"
#include "stegret/payload.hpp"

namespace stegret {

namespace semantics_detail {

inline std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline bool valid_token(const std::string& t) {
    if (t.empty()) return false;
    return std::all_of(t.begin(), t.end(), [](unsigned char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    });
}

} // namespace semantics_detail

// ---------------------------------------------------------------------------
// Ontology: an is-a concept graph with synonyms, loaded from the line-based
// stanza format documented in docs/FORMAT.md.

struct Concept {
    std::string name;
    std::string parent;                // empty = child of the implicit root
    std::vector<std::string> synonyms; // declaration order
    int line = 0;
};

struct Ontology {
    std::map<std::string, Concept> concepts;
    std::map<std::string, std::string> synonym_to_concept;

    bool has_concept(const std::string& name) const { return concepts.count(name) != 0; }

    /// Resolves a token to its canonical concept name, via synonyms if needed.
    std::optional<std::string> resolve(const std::string& token) const {
        if (concepts.count(token)) return token;
        const auto it = synonym_to_concept.find(token);
        if (it != synonym_to_concept.end()) return it->second;
        return std::nullopt;
    }

    /// Direct children of a concept, in lexicographic order.
    std::vector<std::string> children(const std::string& name) const {
        std::vector<std::string> out;
        for (const auto& [child, node] : concepts)
            if (node.parent == name) out.push_back(child);
        return out;
    }
};

inline Ontology parse_ontology(std::istream& in) {
    using namespace semantics_detail;
    Ontology onto;
    std::string line;
    int line_no = 0;
    Concept current;
    bool in_stanza = false;
    bool seen_parent = false, seen_synonyms = false;

    const auto fail = [](int ln, const std::string& msg) {
        raise(Errc::parse_error, "line " + std::to_string(ln) + ": " + msg);
    };
    const auto flush = [&] {
        if (!in_stanza) return;
        if (onto.concepts.count(current.name))
            fail(current.line, "concept '" + current.name + "' already declared");
        onto.concepts[current.name] = current;
        current = Concept{};
        in_stanza = false;
        seen_parent = seen_synonyms = false;
    };

    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = trim(line);
        if (text.empty()) {
            flush();
            continue;
        }
        if (text[0] == '#') continue;

        const auto colon = text.find(':');
        if (colon == std::string::npos)
            fail(line_no, "expected 'key: value'");
        const std::string key = trim(text.substr(0, colon));
        const std::string value = trim(text.substr(colon + 1));

        if (key == "concept") {
            flush();
            if (!valid_token(value))
                fail(line_no, "concept token must match [a-z0-9_-]+");
            current = Concept{value, "", {}, line_no};
            in_stanza = true;
        } else if (key == "parent") {
            if (!in_stanza) fail(line_no, "'parent' outside a concept stanza");
            if (seen_parent) fail(line_no, "duplicate 'parent' in stanza");
            if (!valid_token(value))
                fail(line_no, "parent token must match [a-z0-9_-]+");
            current.parent = value;
            seen_parent = true;
        } else if (key == "synonyms") {
            if (!in_stanza) fail(line_no, "'synonyms' outside a concept stanza");
            if (seen_synonyms) fail(line_no, "duplicate 'synonyms' in stanza");
            std::stringstream ss(value);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                tok = trim(tok);
                if (!valid_token(tok))
                    fail(line_no, "synonym token must match [a-z0-9_-]+");
                current.synonyms.push_back(tok);
            }
            if (current.synonyms.empty())
                fail(line_no, "'synonyms' needs at least one token");
            seen_synonyms = true;
        } else {
            fail(line_no, "unknown key '" + key + "'");
        }
    }
    flush();

    // Parents must be declared concepts.
    for (const auto& [name, node] : onto.concepts) {
        if (!node.parent.empty() && !onto.concepts.count(node.parent))
            fail(node.line, "parent '" + node.parent + "' of '" + name +
                                   "' is not a declared concept");
    }
    // Acyclic is-a chains (each concept has at most one parent).
    for (const auto& [name, node] : onto.concepts) {
        std::vector<std::string> chain{name};
        std::string cursor = node.parent;
        while (!cursor.empty()) {
            if (std::find(chain.begin(), chain.end(), cursor) != chain.end()) {
                std::string path;
                for (const auto& c : chain) path += c + " -> ";
                raise(Errc::cycle_detected, "line " + std::to_string(node.line) +
                                                ": cycle detected: " + path + cursor);
            }
            chain.push_back(cursor);
            cursor = onto.concepts.at(cursor).parent;
        }
    }
    // Synonyms unique across concepts and distinct from concept names.
    for (const auto& [name, node] : onto.concepts) {
        for (const auto& syn : node.synonyms) {
            if (onto.concepts.count(syn))
                raise(Errc::duplicate_synonym,
                      "line " + std::to_string(node.line) + ": synonym '" + syn +
                          "' collides with a concept name");
            const auto [it, inserted] = onto.synonym_to_concept.emplace(syn, name);
            if (!inserted && it->second != name)
                raise(Errc::duplicate_synonym,
                      "line " + std::to_string(node.line) + ": synonym '" + syn +
                          "' already used by concept '" + it->second + "'");
        }
    }
    return onto;
}

inline Ontology load_ontology(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        raise(Errc::io_failure, "cannot open ontology: " + path.string());
    return parse_ontology(in);
}

// ---------------------------------------------------------------------------
// Query expansion. Weight rule: the queried concept and all its synonyms get
// 1.0, its parent 0.5, its children 0.7 (synonyms of a related concept share
// that concept's weight); collisions keep the maximum.

struct ExpandedQuery {
    std::map<std::string, double> weights;

    double total_weight() const {
        double sum = 0.0;
        for (const auto& [term, w] : weights) sum += w;
        return sum;
    }
};

inline ExpandedQuery expand_query(const std::vector<std::string>& terms, const Ontology& onto) {
    using namespace semantics_detail;
    ExpandedQuery q;
    const auto bump = [&](const std::string& term, double w) {
        auto [it, inserted] = q.weights.emplace(term, w);
        if (!inserted && it->second < w) it->second = w;
    };
    const auto add_concept = [&](const std::string& name, double w) {
        bump(name, w);
        for (const auto& syn : onto.concepts.at(name).synonyms) bump(syn, w);
    };

    for (const auto& raw : terms) {
        const std::string term = lower(trim(raw));
        if (term.empty()) continue;
        bump(term, 1.0);
        const auto resolved = onto.resolve(term);
        if (!resolved) continue;
        add_concept(*resolved, 1.0);
        const auto& node = onto.concepts.at(*resolved);
        if (!node.parent.empty()) add_concept(node.parent, 0.5);
        for (const auto& child : onto.children(*resolved)) add_concept(child, 0.7);
    }
    if (q.weights.empty())
        raise(Errc::empty_query, "query has no terms after normalization");
    return q;
}

// ---------------------------------------------------------------------------
// Low-level feature vector: 72 HSV color histogram bins (8 hue x 3 saturation
// x 3 value, L1-normalized) plus the hybrid-edge pixel fraction.

constexpr std::size_t kFeatureDim = 73;

struct FeatureVector {
    std::array<double, kFeatureDim> values{};

    double distance(const FeatureVector& other) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < kFeatureDim; ++i) {
            const double d = values[i] - other.values[i];
            sum += d * d;
        }
        return std::sqrt(sum);
    }
};

inline FeatureVector extract_features(const ImageRaster& raster, const EdgeParams& params = {}) {
    if (raster.width < 5 || raster.height < 5)
        raise(Errc::image_too_small, "feature extraction needs at least 5x5");
    FeatureVector fv;
    const std::size_t pixels = raster.pixel_count();
    for (std::size_t i = 0; i < pixels; ++i) {
        const double r = raster.samples[i * 3 + 0] / 255.0;
        const double g = raster.samples[i * 3 + 1] / 255.0;
        const double b = raster.samples[i * 3 + 2] / 255.0;
        const double mx = std::max({r, g, b});
        const double mn = std::min({r, g, b});
        const double delta = mx - mn;

        double hue = 0.0;
        if (delta > 0.0) {
            if (mx == r)
                hue = 60.0 * std::fmod((g - b) / delta, 6.0);
            else if (mx == g)
                hue = 60.0 * ((b - r) / delta + 2.0);
            else
                hue = 60.0 * ((r - g) / delta + 4.0);
            if (hue < 0.0) hue += 360.0;
        }
        const double sat = mx == 0.0 ? 0.0 : delta / mx;
        const double val = mx;

        const int hb = std::min(7, static_cast<int>(hue / 45.0));
        const int sb = std::min(2, static_cast<int>(sat * 3.0));
        const int vb = std::min(2, static_cast<int>(val * 3.0));
        fv.values[static_cast<std::size_t>(hb) * 9 + sb * 3 + vb] += 1.0;
    }
    for (std::size_t i = 0; i < 72; ++i) fv.values[i] /= static_cast<double>(pixels);

    const EdgeMap map = hybrid_edges(raster, params);
    fv.values[72] = static_cast<double>(map.edge_count()) / static_cast<double>(pixels);
    return fv;
}

// ---------------------------------------------------------------------------
// Nearest-centroid annotation. Deliberately simple: it exists so the embed
// path can generate SemanticRecords automatically, not to compete with real
// classifiers.

using CentroidTable = std::map<std::string, FeatureVector>;

/// Trains per-class mean feature vectors from a directory laid out as
/// <dir>/<class_name>/<image files>. A class directory without a single
/// loadable raster is an error.
inline CentroidTable train_centroids(const std::filesystem::path& dir,
                                     const EdgeParams& params = {}) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(dir, ec))
        raise(Errc::io_failure, "not a directory: " + dir.string());

    CentroidTable table;
    std::vector<fs::path> class_dirs;
    for (const auto& entry : fs::directory_iterator(dir, ec))
        if (entry.is_directory()) class_dirs.push_back(entry.path());
    if (ec)
        raise(Errc::io_failure, "cannot scan: " + dir.string());
    std::sort(class_dirs.begin(), class_dirs.end());

    for (const auto& class_dir : class_dirs) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(class_dir)) {
            if (!entry.is_regular_file()) continue;
            std::string ext = semantics_detail::lower(entry.path().extension().string());
            if (ext == ".png" || ext == ".bmp") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());

        FeatureVector mean;
        std::size_t count = 0;
        for (const auto& file : files) {
            const FeatureVector fv = extract_features(load_image(file), params);
            for (std::size_t i = 0; i < kFeatureDim; ++i) mean.values[i] += fv.values[i];
            ++count;
        }
        if (count == 0)
            raise(Errc::empty_class, "class '" + class_dir.filename().string() +
                                         "' has no loadable images");
        for (std::size_t i = 0; i < kFeatureDim; ++i)
            mean.values[i] /= static_cast<double>(count);
        table[class_dir.filename().string()] = mean;
    }
    if (table.empty())
        raise(Errc::empty_class, "no class directories under " + dir.string());
    return table;
}

/// Nearest centroid by Euclidean distance, ties broken by lexicographic class
/// name. Keywords come from the ontology: the class's synonyms then its
/// parent concept.
inline SemanticRecord annotate_image(const ImageRaster& raster, const CentroidTable& centroids,
                                     const Ontology& onto, const EdgeParams& params = {}) {
    if (centroids.empty())
        raise(Errc::no_centroids, "centroid table is empty");
    const FeatureVector fv = extract_features(raster, params);

    std::string best_class;
    double best_dist = 0.0;
    bool first = true;
    for (const auto& [name, centroid] : centroids) {
        const double d = fv.distance(centroid);
        if (first || d < best_dist) { // map order makes ties lexicographic
            best_class = name;
            best_dist = d;
            first = false;
        }
    }

    SemanticRecord rec;
    rec.class_label = best_class;
    const auto it = onto.concepts.find(best_class);
    if (it != onto.concepts.end()) {
        rec.keywords = it->second.synonyms;
        if (!it->second.parent.empty()) rec.keywords.push_back(it->second.parent);
    }
    return rec;
}

// Centroid table file format: "stegret-centroids 1" then one line per class,
// class name followed by 73 space-separated values.

inline void save_centroids(const CentroidTable& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        raise(Errc::io_failure, "cannot open for writing: " + path.string());
    out << "stegret-centroids 1\n";
    out.precision(17);
    for (const auto& [name, fv] : table) {
        out << name;
        for (double v : fv.values) out << ' ' << v;
        out << '\n';
    }
    if (!out)
        raise(Errc::io_failure, "write failed: " + path.string());
}

inline CentroidTable load_centroids(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        raise(Errc::io_failure, "cannot open centroids: " + path.string());
    std::string line;
    if (!std::getline(in, line) || semantics_detail::trim(line) != "stegret-centroids 1")
        raise(Errc::parse_error, path.string() + ": not a centroid table");
    CentroidTable table;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (semantics_detail::trim(line).empty()) continue;
        std::istringstream ss(line);
        std::string name;
        ss >> name;
        FeatureVector fv;
        for (std::size_t i = 0; i < kFeatureDim; ++i) {
            if (!(ss >> fv.values[i]))
                raise(Errc::parse_error, path.string() + ": line " + std::to_string(line_no) +
                                             ": expected 73 values");
        }
        table[name] = fv;
    }
    return table;
}

} // namespace stegret
