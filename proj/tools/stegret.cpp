// stegret command line: embed/extract semantic records in images, index and
// query stego corpora, and benchmark embedding quality and retrieval timing.
//
// Exit codes: 0 ok, 2 usage, 3 format, 4 capacity, 5 integrity, 6 no-payload,
// 7 io.

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "stegret/stegret.hpp"

namespace fs = std::filesystem;
using namespace stegret;

namespace {

constexpr int kExitUsage = 2;

int exit_code_for(Errc code) {
    switch (code) {
        case Errc::empty_query:
            return kExitUsage;
        case Errc::capacity_exceeded:
            return 4;
        case Errc::integrity_failure:
        case Errc::header_corrupt:
            return 5;
        case Errc::no_payload:
            return 6;
        case Errc::io_failure:
            return 7;
        default:
            return 3;
    }
}

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string resolve_key(const std::string& flag_value, const char* env_name,
                        const char* flag_name) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv(env_name); env && *env) return env;
    throw UsageError(std::string("missing ") + flag_name + " (or " + env_name + ")");
}

// Shared --k-smooth/--k-edge/edge-detector flags; mask_bits always follows
// k_edge so the recomputed map matches.
struct ConfigFlags {
    int k_smooth = 1;
    int k_edge = 3;
    int laplacian_threshold = 16;
    double log_sigma = 1.0;
    int log_threshold = 4;
    double fuzzy_low = 0.0625;
    double fuzzy_high = 0.25;

    void attach(CLI::App* cmd) {
        cmd->add_option("--k-smooth", k_smooth, "bits per sample at smooth pixels (default 1)");
        cmd->add_option("--k-edge", k_edge, "bits per sample at edge pixels (default 3)");
        cmd->add_option("--laplacian-threshold", laplacian_threshold,
                        "laplacian edge threshold (default 16)");
        cmd->add_option("--log-sigma", log_sigma, "gaussian sigma for LoG (default 1.0)");
        cmd->add_option("--log-threshold", log_threshold, "LoG edge threshold (default 4)");
        cmd->add_option("--fuzzy-low", fuzzy_low, "fuzzy membership low point (default 0.0625)");
        cmd->add_option("--fuzzy-high", fuzzy_high, "fuzzy membership high point (default 0.25)");
    }

    EmbedConfig build() const {
        EmbedConfig cfg;
        cfg.k_smooth = k_smooth;
        cfg.k_edge = k_edge;
        cfg.edge_params.laplacian_threshold = laplacian_threshold;
        cfg.edge_params.log_sigma = log_sigma;
        cfg.edge_params.log_threshold = log_threshold;
        cfg.edge_params.fuzzy_low = fuzzy_low;
        cfg.edge_params.fuzzy_high = fuzzy_high;
        cfg.edge_params.mask_bits = k_edge;
        cfg.validate();
        return cfg;
    }
};

std::string format_score(double v) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(4) << v;
    return ss.str();
}

std::string format_metric(double v) {
    if (std::isinf(v)) return "inf";
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(4) << v;
    return ss.str();
}

void print_record(const SemanticRecord& rec) {
    std::cout << "class=" << rec.class_label << "\n";
    std::cout << "keywords=";
    for (std::size_t i = 0; i < rec.keywords.size(); ++i)
        std::cout << (i ? "," : "") << rec.keywords[i];
    std::cout << "\n";
    std::cout << "description=" << rec.description << "\n";
    for (const auto& [k, v] : rec.attributes) std::cout << "attr." << k << "=" << v << "\n";
}

std::string sanitize_class_token(std::string s) {
    s = semantics_detail::lower(s);
    for (char& c : s)
        if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-')) c = '-';
    while (!s.empty() && s.front() == '-') s.erase(s.begin());
    if (s.empty()) s = "img";
    if (s.size() > 64) s.resize(64);
    return s;
}

// Deterministic pseudorandom message bits for the LSB-family baselines.
std::vector<std::uint8_t> bench_message_bits(std::size_t n_bits) {
    const auto bytes = keystream(EncryptionKey{"stegret-bench-message"}, 0, (n_bits + 7) / 8);
    std::vector<std::uint8_t> bits(n_bits);
    for (std::size_t i = 0; i < n_bits; ++i) bits[i] = (bytes[i / 8] >> (7 - i % 8)) & 1;
    return bits;
}

SemanticRecord bench_record(const std::string& cls, std::size_t target_bytes) {
    SemanticRecord rec;
    rec.class_label = cls;
    const std::size_t overhead = 2 + 3 + cls.size() + 3; // count + class TLV + description TLV
    if (target_bytes > overhead)
        rec.description.assign(std::min<std::size_t>(target_bytes - overhead, 0xFFFF), 'x');
    return rec;
}

// Temporary stego corpus for the Fig-8-style timing comparison; removed on
// scope exit.
struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() /
               (tag + "-" + std::to_string(static_cast<unsigned>(::getpid())));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

// ---------------------------------------------------------------------------

int cmd_embed(const std::string& in, const std::string& out, const std::string& cls,
              const std::vector<std::string>& keywords, const std::string& description,
              const std::vector<std::string>& attrs, bool auto_annotate,
              const std::string& centroids_path, const std::string& ontology_path,
              const std::string& enc_key, const std::string& stego_key,
              const ConfigFlags& flags) {
    const EmbedConfig cfg = flags.build();
    const ImageRaster cover = load_image(in);

    SemanticRecord rec;
    if (auto_annotate) {
        if (centroids_path.empty())
            throw UsageError("--auto-annotate needs --centroids");
        const CentroidTable table = load_centroids(centroids_path);
        const Ontology onto =
            ontology_path.empty() ? Ontology{} : load_ontology(ontology_path);
        rec = annotate_image(cover, table, onto, cfg.edge_params);
    } else {
        if (cls.empty())
            throw UsageError("either --class or --auto-annotate is required");
        rec.class_label = cls;
        rec.keywords = keywords;
        rec.description = description;
        for (const auto& a : attrs) {
            const auto eq = a.find('=');
            if (eq == std::string::npos)
                throw UsageError("--attr expects key=value, got '" + a + "'");
            rec.attributes.emplace_back(a.substr(0, eq), a.substr(eq + 1));
        }
    }

    const StegoImage stego =
        esha_embed(cover, rec, EncryptionKey{enc_key}, StegoKey{stego_key}, cfg);
    save_image(stego.raster, out);

    const std::size_t record_bits = serialize_record(rec).size() * 8;
    std::cout << "payload: " << (PayloadHeader::kBits + record_bits) << " bits (header "
              << PayloadHeader::kBits << " + record " << record_bits << ")\n";
    std::cout << "capacity: " << capacity(cover, cfg) << " bits\n";
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_extract(const std::string& in, const std::string& enc_key,
                const std::string& stego_key, const ConfigFlags& flags) {
    const EmbedConfig cfg = flags.build();
    const ImageRaster raster = load_image(in);
    print_record(esha_extract(raster, EncryptionKey{enc_key}, StegoKey{stego_key}, cfg));
    return 0;
}

int cmd_index(const std::string& dir) {
    const IndexReport report = index_directory(dir);
    std::size_t with_payload = 0;
    for (const auto& e : report.manifest.entries)
        if (e.payload_present) ++with_payload;
    for (const auto& [path, reason] : report.failures)
        std::cerr << "skip: " << path << ": " << reason << "\n";
    std::cout << "indexed " << report.manifest.entries.size() << " entries (" << with_payload
              << " with payload) -> " << (fs::path(dir) / kManifestFilename).string() << "\n";
    return 0;
}

int cmd_query(const std::string& dir, const std::vector<std::string>& terms,
              const std::string& enc_key, const std::string& stego_key,
              const std::string& ontology_path, const RetrievalPrefs& prefs,
              const ConfigFlags& flags) {
    const EmbedConfig cfg = flags.build();
    const Ontology onto = ontology_path.empty() ? Ontology{} : load_ontology(ontology_path);
    const QueryOutcome outcome =
        query(dir, terms, EncryptionKey{enc_key}, StegoKey{stego_key}, cfg, onto, prefs);
    for (const auto& [path, reason] : outcome.skipped)
        std::cerr << "skip: " << path << ": " << reason << "\n";

    const auto emit = [](const char* tier, const std::vector<RankedEntry>& entries) {
        for (const auto& e : entries)
            std::cout << tier << "\t" << format_score(e.score) << "\t" << e.path << "\t"
                      << e.record.class_label << "\n";
    };
    emit("high", outcome.results.high);
    emit("medium", outcome.results.medium);
    emit("low", outcome.results.low);
    if (outcome.results.total() == 0) std::cout << "no results\n";
    return 0;
}

int cmd_bench(const std::string& dir, const std::string& methods_csv,
              std::size_t payload_bits, const std::string& sweep_csv,
              const std::string& enc_key, const std::string& stego_key,
              const std::string& ontology_path, const ConfigFlags& flags) {
    const EmbedConfig cfg = flags.build();
    const EncryptionKey ek{enc_key};
    const StegoKey sk{stego_key};

    std::vector<std::string> methods;
    {
        std::stringstream ss(methods_csv);
        std::string m;
        while (std::getline(ss, m, ',')) {
            m = semantics_detail::trim(m);
            if (m.empty()) continue;
            if (m != "esha" && m != "lsb1" && m != "lsb3" && m != "lsbm" && m != "lsbmr")
                throw UsageError("unknown method '" + m + "'");
            methods.push_back(m);
        }
        if (methods.empty()) throw UsageError("--methods lists no methods");
    }
    std::vector<std::size_t> payloads;
    if (!sweep_csv.empty()) {
        std::stringstream ss(sweep_csv);
        std::string p;
        while (std::getline(ss, p, ','))
            if (!semantics_detail::trim(p).empty())
                payloads.push_back(std::stoull(semantics_detail::trim(p)));
    } else {
        payloads.push_back(payload_bits);
    }
    for (std::size_t p : payloads)
        if (p < 8 || p % 2 != 0)
            throw UsageError("payload sizes must be even and at least 8 bits");

    const auto files = retrieval_detail::list_rasters(dir);
    if (files.empty())
        raise(Errc::io_failure, "no lossless rasters under " + dir);

    std::cout << "image,method,payload_bits,psnr_db,ssim\n";
    for (std::size_t p : payloads) {
        const auto message = bench_message_bits(p);
        for (const auto& method : methods) {
            double psnr_sum = 0.0, ssim_sum = 0.0;
            std::size_t rows = 0;
            for (const auto& file : files) {
                const ImageRaster cover = load_image(file);
                ImageRaster stego;
                try {
                    if (method == "esha") {
                        const auto rec =
                            bench_record(sanitize_class_token(file.stem().string()), p / 8);
                        stego = esha_embed(cover, rec, ek, sk, cfg).raster;
                    } else if (method == "lsb1") {
                        stego = lsb_embed(cover, message, 1);
                    } else if (method == "lsb3") {
                        stego = lsb_embed(cover, message, 3);
                    } else if (method == "lsbm") {
                        stego = lsbm_embed(cover, message, ek);
                    } else {
                        stego = lsbmr_embed(cover, message, ek);
                    }
                } catch (const Error& e) {
                    std::cerr << "skip: " << file.filename().string() << " (" << method
                              << "): " << e.what() << "\n";
                    continue;
                }
                const double p_db = psnr(cover, stego);
                const double s_val = ssim(cover, stego);
                std::cout << file.filename().string() << ',' << method << ',' << p << ','
                          << format_metric(p_db) << ',' << std::fixed << std::setprecision(6)
                          << s_val << "\n";
                psnr_sum += p_db;
                ssim_sum += s_val;
                ++rows;
            }
            if (rows > 0)
                std::cout << "average," << method << ',' << p << ','
                          << format_metric(psnr_sum / rows) << ',' << std::fixed
                          << std::setprecision(6) << ssim_sum / rows << "\n";
        }
    }

    // Fig-8-style timing: build a temporary stego corpus from the covers and
    // compare the extraction-based query path against per-query feature
    // recomputation.
    TempDir tmp("stegret-bench");
    std::string first_class;
    for (const auto& file : files) {
        const ImageRaster cover = load_image(file);
        const std::string cls = sanitize_class_token(file.stem().string());
        if (first_class.empty() || cls < first_class) first_class = cls;
        SemanticRecord rec;
        rec.class_label = cls;
        try {
            const StegoImage stego = esha_embed(cover, rec, ek, sk, cfg);
            save_image(stego.raster, tmp.path / (file.stem().string() + ".png"));
        } catch (const Error& e) {
            std::cerr << "skip (timing): " << file.filename().string() << ": " << e.what()
                      << "\n";
        }
    }
    index_directory(tmp.path);
    const Ontology onto = ontology_path.empty() ? Ontology{} : load_ontology(ontology_path);
    const TimingReport timing = timing_bench(tmp.path, {first_class}, ek, sk, cfg, onto);
    std::cout << "timing,extract_seconds," << std::setprecision(6) << timing.extract_seconds
              << "\n";
    std::cout << "timing,recompute_seconds," << timing.recompute_seconds << "\n";
    std::cout << "timing,ratio," << timing.ratio << "\n";
    return 0;
}

int cmd_ontology_check(const std::string& path) {
    const Ontology onto = load_ontology(path);
    std::size_t synonyms = 0;
    for (const auto& [name, node] : onto.concepts) synonyms += node.synonyms.size();
    std::cout << "ok: " << onto.concepts.size() << " concepts, " << synonyms << " synonyms\n";
    return 0;
}

int cmd_annotate_train(const std::string& dir, const std::string& out,
                       const ConfigFlags& flags) {
    const EmbedConfig cfg = flags.build();
    const CentroidTable table = train_centroids(dir, cfg.edge_params);
    save_centroids(table, out);
    std::cout << "trained " << table.size() << " classes from " << dir << " -> " << out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stegret: edge-adaptive semantic hiding and secure retrieval for images"};
    app.require_subcommand(1);

    std::string in, out, dir, cls, description, centroids_path, ontology_path;
    std::string enc_key_flag, stego_key_flag;
    std::vector<std::string> keywords, attrs, terms;
    bool auto_annotate = false;
    ConfigFlags flags;
    RetrievalPrefs prefs;
    std::string methods_csv = "esha,lsb1,lsb3,lsbm,lsbmr", sweep_csv;
    std::size_t payload_bits = 8192;

    auto* embed = app.add_subcommand("embed", "embed a semantic record into an image");
    embed->add_option("-i,--in", in, "cover image (png or bmp)")->required();
    embed->add_option("-o,--out", out, "stego image output path")->required();
    embed->add_option("--class", cls, "class label");
    embed->add_option("--keyword", keywords, "keyword (repeatable)");
    embed->add_option("--description", description, "free-text description");
    embed->add_option("--attr", attrs, "attribute key=value (repeatable)");
    embed->add_flag("--auto-annotate", auto_annotate, "derive the record via nearest centroid");
    embed->add_option("--centroids", centroids_path, "centroid table for --auto-annotate");
    embed->add_option("--ontology", ontology_path, "ontology for annotation keywords");
    embed->add_option("--enc-key", enc_key_flag, "encryption key (or ESHA_ENC_KEY)");
    embed->add_option("--stego-key", stego_key_flag, "stego key (or ESHA_STEGO_KEY)");
    flags.attach(embed);

    auto* extract = app.add_subcommand("extract", "extract the embedded record");
    extract->add_option("-i,--in", in, "stego image")->required();
    extract->add_option("--enc-key", enc_key_flag, "encryption key (or ESHA_ENC_KEY)");
    extract->add_option("--stego-key", stego_key_flag, "stego key (or ESHA_STEGO_KEY)");
    ConfigFlags extract_flags;
    extract_flags.attach(extract);

    auto* index = app.add_subcommand("index", "write the manifest for a corpus directory");
    index->add_option("--dir", dir, "corpus directory")->required();

    auto* query_cmd = app.add_subcommand("query", "tiered keyword query over a stego corpus");
    query_cmd->add_option("--dir", dir, "corpus directory")->required();
    query_cmd->add_option("terms", terms, "query terms")->required();
    query_cmd->add_option("--enc-key", enc_key_flag, "encryption key (or ESHA_ENC_KEY)");
    query_cmd->add_option("--stego-key", stego_key_flag, "stego key (or ESHA_STEGO_KEY)");
    query_cmd->add_option("--ontology", ontology_path, "ontology for query expansion");
    query_cmd->add_option("--high-threshold", prefs.high_threshold, "high tier cutoff (0.75)");
    query_cmd->add_option("--medium-threshold", prefs.medium_threshold,
                          "medium tier cutoff (0.40)");
    query_cmd->add_option("--min-score", prefs.min_score, "drop results below this (0.05)");
    query_cmd->add_option("--max-per-tier", prefs.max_per_tier, "cap per tier (0 = uncapped)");
    ConfigFlags query_flags;
    query_flags.attach(query_cmd);

    auto* bench = app.add_subcommand("bench", "PSNR/SSIM table and timing comparison");
    bench->add_option("--dir", dir, "corpus of lossless cover images")->required();
    bench->add_option("--methods", methods_csv, "comma list of esha,lsb1,lsb3,lsbm,lsbmr");
    bench->add_option("--payload", payload_bits, "payload size in bits (default 8192)");
    bench->add_option("--sweep", sweep_csv, "comma list of payload sizes (overrides --payload)");
    bench->add_option("--enc-key", enc_key_flag, "encryption key for esha rows");
    bench->add_option("--stego-key", stego_key_flag, "stego key for esha rows");
    bench->add_option("--ontology", ontology_path, "ontology for the timing query");
    ConfigFlags bench_flags;
    bench_flags.attach(bench);

    auto* onto_check = app.add_subcommand("ontology-check", "validate an ontology file");
    onto_check->add_option("--ontology", ontology_path, "ontology file")->required();

    auto* train = app.add_subcommand("annotate-train",
                                     "train nearest-centroid classes from a labeled directory");
    train->add_option("--dir", dir, "directory laid out as class_name/image files")->required();
    train->add_option("--out", out, "centroid table output path")->required();
    ConfigFlags train_flags;
    train_flags.attach(train);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (embed->parsed()) {
            return cmd_embed(in, out, cls, keywords, description, attrs, auto_annotate,
                             centroids_path, ontology_path,
                             resolve_key(enc_key_flag, "ESHA_ENC_KEY", "--enc-key"),
                             resolve_key(stego_key_flag, "ESHA_STEGO_KEY", "--stego-key"),
                             flags);
        }
        if (extract->parsed()) {
            return cmd_extract(in, resolve_key(enc_key_flag, "ESHA_ENC_KEY", "--enc-key"),
                               resolve_key(stego_key_flag, "ESHA_STEGO_KEY", "--stego-key"),
                               extract_flags);
        }
        if (index->parsed()) return cmd_index(dir);
        if (query_cmd->parsed()) {
            return cmd_query(dir, terms,
                             resolve_key(enc_key_flag, "ESHA_ENC_KEY", "--enc-key"),
                             resolve_key(stego_key_flag, "ESHA_STEGO_KEY", "--stego-key"),
                             ontology_path, prefs, query_flags);
        }
        if (bench->parsed()) {
            const std::string ek = enc_key_flag.empty() ? "stegret-bench-enc" : enc_key_flag;
            const std::string sk = stego_key_flag.empty() ? "stegret-bench-stego" : stego_key_flag;
            return cmd_bench(dir, methods_csv, payload_bits, sweep_csv, ek, sk, ontology_path,
                             bench_flags);
        }
        if (onto_check->parsed()) return cmd_ontology_check(ontology_path);
        if (train->parsed()) return cmd_annotate_train(dir, out, train_flags);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << errc_name(e.code()) << ": " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
