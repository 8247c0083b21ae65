// Experiment harness: runs the pipeline matrix over a generated corpus, audits
// every output against its expected quadrant, and renders the aggregate
// artifacts (report.json, summary.csv, tables.md, bit_accuracy.csv).
//
// Determinism contract: one payload and one key are derived from the config
// master seed, every asset is keyed by (pipeline, image index), and reduction
// happens sequentially in index order — so results are byte-identical for any
// parallelism degree.
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "xprov/audit.hpp"
#include "xprov/codec.hpp"
#include "xprov/container.hpp"
#include "xprov/corpus.hpp"
#include "xprov/manifest.hpp"
#include "xprov/perturb.hpp"
#include "xprov/rng.hpp"
#include "xprov/watermark.hpp"

namespace xprov {

// ---------------------------------------------------------------------------
// Pipelines

enum class PipelineId {
    baseline,
    watermarked,
    honest,
    misleading,
    misleading_jpeg,
    misleading_crop,
    misleading_screenshot,
    unmarked_misleading,  // optional: exercises Q3, off by default
};

inline const char* to_string(PipelineId id) {
    switch (id) {
        case PipelineId::baseline: return "baseline";
        case PipelineId::watermarked: return "watermarked";
        case PipelineId::honest: return "honest";
        case PipelineId::misleading: return "misleading";
        case PipelineId::misleading_jpeg: return "misleading_jpeg";
        case PipelineId::misleading_crop: return "misleading_crop";
        case PipelineId::misleading_screenshot: return "misleading_screenshot";
        case PipelineId::unmarked_misleading: return "unmarked_misleading";
    }
    return "?";
}

struct PipelineSpec {
    PipelineId id = PipelineId::baseline;
    bool watermark = false;
    std::optional<ManifestTemplate> manifest;
    Perturbation perturbation = Perturbation::none;
    Quadrant expected_quadrant = Quadrant::Q1;
};

inline std::vector<PipelineSpec> standard_pipelines(bool enable_q3 = false) {
    using P = PipelineId;
    using T = ManifestTemplate;
    std::vector<PipelineSpec> v{
        {P::baseline, false, std::nullopt, Perturbation::none, Quadrant::Q1},
        {P::watermarked, true, std::nullopt, Perturbation::none, Quadrant::Q2},
        {P::honest, true, T::honest, Perturbation::none, Quadrant::Q4a},
        {P::misleading, true, T::misleading, Perturbation::none, Quadrant::Q4b},
        {P::misleading_jpeg, true, T::misleading, Perturbation::jpeg_q80, Quadrant::Q4b},
        {P::misleading_crop, true, T::misleading, Perturbation::crop10_resize, Quadrant::Q4b},
        {P::misleading_screenshot, true, T::misleading, Perturbation::screenshot_sim,
         Quadrant::Q4b},
    };
    if (enable_q3)
        v.push_back({P::unmarked_misleading, false, T::misleading, Perturbation::none, Quadrant::Q3});
    return v;
}

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
    std::uint64_t master_seed = 7;
    int n = 50;
    int size = 512;
    double alpha = 3.0;
    double threshold = 0.75;
    std::vector<double> sync_scales = EmbedConfig{}.sync_scales;
    int parallelism = 0;  // 0 = all available cores
    std::string output_dir = "out";
    bool enable_q3_pipeline = false;
};

// Seed-derivation indices for the run-wide payload and key; far outside the
// corpus index range so they never collide with per-image seeds.
inline constexpr std::uint64_t kPayloadSeedIndex = 0x100000001ULL;
inline constexpr std::uint64_t kKeySeedIndex = 0x100000002ULL;

inline Payload run_payload(const RunConfig& cfg) {
    return random_payload(derive_seed(cfg.master_seed, kPayloadSeedIndex));
}

inline WatermarkKey run_key(const RunConfig& cfg) {
    return WatermarkKey{derive_seed(cfg.master_seed, kKeySeedIndex)};
}

inline EmbedConfig embed_config(const RunConfig& cfg) {
    EmbedConfig e;
    e.strength_alpha = cfg.alpha;
    e.detection_threshold = cfg.threshold;
    e.sync_scales = cfg.sync_scales;
    return e;
}

inline nlohmann::json config_to_json(const RunConfig& c) {
    return nlohmann::json{{"master_seed", c.master_seed},
                          {"n", c.n},
                          {"size", c.size},
                          {"alpha", c.alpha},
                          {"threshold", c.threshold},
                          {"sync_scales", c.sync_scales},
                          {"parallelism", c.parallelism},
                          {"output_dir", c.output_dir},
                          {"enable_q3_pipeline", c.enable_q3_pipeline}};
}

// Strict parse: every key must be known; absent keys keep their defaults.
inline RunConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
    RunConfig c;
    for (const auto& [key, value] : j.items()) {
        if (key == "master_seed") c.master_seed = value.get<std::uint64_t>();
        else if (key == "n") c.n = value.get<int>();
        else if (key == "size") c.size = value.get<int>();
        else if (key == "alpha") c.alpha = value.get<double>();
        else if (key == "threshold") c.threshold = value.get<double>();
        else if (key == "sync_scales") c.sync_scales = value.get<std::vector<double>>();
        else if (key == "parallelism") c.parallelism = value.get<int>();
        else if (key == "output_dir") c.output_dir = value.get<std::string>();
        else if (key == "enable_q3_pipeline") c.enable_q3_pipeline = value.get<bool>();
        else throw std::invalid_argument("config: unknown key \"" + key + "\"");
    }
    if (c.n < 1) throw std::invalid_argument("config: n must be positive");
    if (c.sync_scales.empty()) throw std::invalid_argument("config: sync_scales must be non-empty");
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    nlohmann::json j;
    in >> j;
    return config_from_json(j);
}

inline std::string now_rfc3339_utc() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ---------------------------------------------------------------------------
// Pipeline execution

// Fixed order of operations: embed -> perturb -> PNG-encode -> sign.  Signing
// last means the manifest hash binds the perturbed file, so it verifies as
// valid — that ordering is what makes the misleading pipelines a clash rather
// than a tamper case.
inline AssetFile build_asset(const Image& source, const PipelineSpec& spec, const Payload& payload,
                             const PatternField& field, const EmbedConfig& ecfg,
                             const CertChain& chain, const std::string& signed_at) {
    Image px = spec.watermark ? embed(source, payload, field, ecfg) : source;
    px = apply(px, spec.perturbation);
    AssetFile file = asset_from_bytes(png_encode(px));
    if (spec.manifest) file = sign_and_attach(file, *spec.manifest, chain, signed_at);
    return file;
}

inline std::string asset_id_for(PipelineId id, std::size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "_%04zu", index);
    return std::string(to_string(id)) + buf;
}

struct PipelineAsset {
    std::string asset_id;
    AssetFile file;
    Quadrant expected = Quadrant::Q1;
};

inline std::vector<PipelineAsset> run_pipeline(const PipelineSpec& spec,
                                               const std::vector<std::pair<Image, CorpusRecord>>& corpus,
                                               const Payload& payload, const WatermarkKey& key,
                                               const CertChain& chain, const EmbedConfig& ecfg = {},
                                               const std::string& signed_at = "2026-01-01T00:00:00Z") {
    if (corpus.empty()) throw std::invalid_argument("run_pipeline: empty corpus");
    const PatternField field = derive_patterns(key, ecfg);
    std::vector<PipelineAsset> out;
    out.reserve(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        PipelineAsset a;
        a.asset_id = asset_id_for(spec.id, i);
        a.file = build_asset(corpus[i].first, spec, payload, field, ecfg, chain, signed_at);
        a.expected = spec.expected_quadrant;
        out.push_back(std::move(a));
    }
    return out;
}

namespace detail {

// Index-grained work stealing; slot-per-index writes keep results independent
// of scheduling. The first exception wins and is rethrown after join.
template <typename Fn>
inline void parallel_for(std::size_t count, int degree, Fn&& fn) {
    if (degree <= 0) degree = static_cast<int>(std::thread::hardware_concurrency());
    if (degree < 1) degree = 1;
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(degree), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) threads.emplace_back(body);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Experiment report

struct AssetResult {
    std::string pipeline;
    Quadrant expected = Quadrant::Q1;
    AuditReport report;
};

struct PipelineStats {
    std::string pipeline;
    std::size_t n = 0;
    double c2pa_valid_pct = 0.0;
    double mean_bit_accuracy = 0.0;
    double min_bit_accuracy = 0.0;
    double classified_correct_pct = 0.0;
};

struct ExperimentReport {
    RunConfig config;
    std::vector<PipelineStats> pipelines;
    Metrics metrics;
    std::vector<std::pair<std::string, std::vector<double>>> bit_accuracy_samples;
    std::vector<AssetResult> assets;  // pipeline-major, then image index
};

// Computes the full matrix without touching the filesystem. Work fans out per
// image (each worker builds and audits all pipeline variants of its image, so
// the embed runs once per image); aggregation is a sequential reduction.
inline ExperimentReport compute_experiment(const RunConfig& config) {
    const auto pipelines = standard_pipelines(config.enable_q3_pipeline);
    const std::size_t n = static_cast<std::size_t>(config.n);
    const std::size_t np = pipelines.size();

    const Payload payload = run_payload(config);
    const WatermarkKey key = run_key(config);
    const EmbedConfig ecfg = embed_config(config);
    const PatternField field = derive_patterns(key, ecfg);
    const CertChain chain = generate_cert_chain("Conflict Matrix Harness");
    const TrustStore store = TrustStore{}.with_root(chain.root_der);
    const std::string signed_at = now_rfc3339_utc();

    std::vector<AuditReport> reports(np * n);
    detail::parallel_for(n, config.parallelism, [&](std::size_t i) {
        const Image source = generate_image(corpus_record(config.master_seed, i), config.size);
        std::optional<Image> watermarked;
        for (std::size_t p = 0; p < np; ++p) {
            const PipelineSpec& spec = pipelines[p];
            Image px = source;
            if (spec.watermark) {
                if (!watermarked) watermarked = embed(source, payload, field, ecfg);
                px = *watermarked;
            }
            px = apply(px, spec.perturbation);
            AssetFile file = asset_from_bytes(png_encode(px));
            if (spec.manifest) file = sign_and_attach(file, *spec.manifest, chain, signed_at);
            reports[p * n + i] =
                audit_file(file, payload, key, store, ecfg, asset_id_for(spec.id, i));
        }
    });

    ExperimentReport out;
    out.config = config;
    std::vector<Quadrant> truth;
    truth.reserve(np * n);
    for (std::size_t p = 0; p < np; ++p) {
        const PipelineSpec& spec = pipelines[p];
        PipelineStats st;
        st.pipeline = to_string(spec.id);
        st.n = n;
        std::vector<double> samples;
        samples.reserve(n);
        double sum = 0.0, mn = 1.0;
        std::size_t valid = 0, correct = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const AuditReport& r = reports[p * n + i];
            sum += r.signals.bit_accuracy;
            mn = std::min(mn, r.signals.bit_accuracy);
            if (r.signals.manifest_valid) ++valid;
            if (r.quadrant == spec.expected_quadrant) ++correct;
            samples.push_back(r.signals.bit_accuracy);
            out.assets.push_back({st.pipeline, spec.expected_quadrant, r});
            truth.push_back(spec.expected_quadrant);
        }
        st.c2pa_valid_pct = 100.0 * static_cast<double>(valid) / static_cast<double>(n);
        st.mean_bit_accuracy = sum / static_cast<double>(n);
        st.min_bit_accuracy = mn;
        st.classified_correct_pct = 100.0 * static_cast<double>(correct) / static_cast<double>(n);
        out.bit_accuracy_samples.emplace_back(st.pipeline, std::move(samples));
        out.pipelines.push_back(std::move(st));
    }
    out.metrics = compute_metrics(reports, truth);
    return out;
}

// ---------------------------------------------------------------------------
// Serialization and rendering

inline nlohmann::json audit_report_to_json(const AuditReport& r) {
    return nlohmann::json{{"asset_id", r.asset_id},
                          {"manifest_valid", r.signals.manifest_valid},
                          {"ai_disclosed", r.signals.ai_disclosed},
                          {"trust", to_string(r.signals.trust)},
                          {"watermark_detected", r.signals.watermark_detected},
                          {"bit_accuracy", r.signals.bit_accuracy},
                          {"quadrant", to_string(r.quadrant)},
                          {"clash", r.clash},
                          {"notes", r.notes}};
}

inline nlohmann::json metrics_to_json(const Metrics& m) {
    nlohmann::json j{{"fpr", m.fpr},
                     {"accuracy", m.accuracy},
                     {"true_positives", m.true_positives},
                     {"false_positives", m.false_positives},
                     {"positives", m.positives},
                     {"negatives", m.negatives},
                     {"correct", m.correct},
                     {"total", m.total}};
    j["tpr"] = m.tpr ? nlohmann::json(*m.tpr) : nlohmann::json(nullptr);
    return j;
}

inline nlohmann::json report_to_json(const ExperimentReport& rep) {
    nlohmann::json pipelines = nlohmann::json::array();
    for (const auto& st : rep.pipelines)
        pipelines.push_back({{"pipeline", st.pipeline},
                             {"n", st.n},
                             {"c2pa_valid_pct", st.c2pa_valid_pct},
                             {"mean_bit_accuracy", st.mean_bit_accuracy},
                             {"min_bit_accuracy", st.min_bit_accuracy},
                             {"classified_correct_pct", st.classified_correct_pct}});
    nlohmann::json assets = nlohmann::json::array();
    for (const auto& a : rep.assets) {
        nlohmann::json j = audit_report_to_json(a.report);
        j["pipeline"] = a.pipeline;
        j["expected"] = to_string(a.expected);
        assets.push_back(std::move(j));
    }
    // Echo only the fields that determine results; parallelism and output_dir
    // are execution details and must not break byte-identity across degrees.
    nlohmann::json config = config_to_json(rep.config);
    config.erase("parallelism");
    config.erase("output_dir");
    return nlohmann::json{{"config", std::move(config)},
                          {"pipelines", std::move(pipelines)},
                          {"metrics", metrics_to_json(rep.metrics)},
                          {"assets", std::move(assets)}};
}

inline AuditReport audit_report_from_json(const nlohmann::json& j) {
    AuditReport r;
    r.asset_id = j.at("asset_id").get<std::string>();
    r.signals.manifest_valid = j.at("manifest_valid").get<bool>();
    r.signals.ai_disclosed = j.at("ai_disclosed").get<bool>();
    r.signals.trust = manifest_status_from_string(j.at("trust").get<std::string>());
    r.signals.watermark_detected = j.at("watermark_detected").get<bool>();
    r.signals.bit_accuracy = j.at("bit_accuracy").get<double>();
    r.quadrant = quadrant_from_string(j.at("quadrant").get<std::string>());
    r.clash = j.at("clash").get<bool>();
    r.notes = j.at("notes").get<std::vector<std::string>>();
    return r;
}

inline ExperimentReport report_from_json(const nlohmann::json& j) {
    ExperimentReport rep;
    rep.config = config_from_json(j.at("config"));
    for (const auto& p : j.at("pipelines")) {
        PipelineStats st;
        st.pipeline = p.at("pipeline").get<std::string>();
        st.n = p.at("n").get<std::size_t>();
        st.c2pa_valid_pct = p.at("c2pa_valid_pct").get<double>();
        st.mean_bit_accuracy = p.at("mean_bit_accuracy").get<double>();
        st.min_bit_accuracy = p.at("min_bit_accuracy").get<double>();
        st.classified_correct_pct = p.at("classified_correct_pct").get<double>();
        rep.pipelines.push_back(std::move(st));
    }
    const nlohmann::json& m = j.at("metrics");
    if (!m.at("tpr").is_null()) rep.metrics.tpr = m.at("tpr").get<double>();
    rep.metrics.fpr = m.at("fpr").get<double>();
    rep.metrics.accuracy = m.at("accuracy").get<double>();
    rep.metrics.true_positives = m.at("true_positives").get<std::size_t>();
    rep.metrics.false_positives = m.at("false_positives").get<std::size_t>();
    rep.metrics.positives = m.at("positives").get<std::size_t>();
    rep.metrics.negatives = m.at("negatives").get<std::size_t>();
    rep.metrics.correct = m.at("correct").get<std::size_t>();
    rep.metrics.total = m.at("total").get<std::size_t>();
    for (const auto& a : j.at("assets")) {
        AssetResult res;
        res.pipeline = a.at("pipeline").get<std::string>();
        res.expected = quadrant_from_string(a.at("expected").get<std::string>());
        res.report = audit_report_from_json(a);
        rep.assets.push_back(std::move(res));
    }
    // Rebuild per-condition samples from the asset list (pipeline-major order).
    for (const auto& st : rep.pipelines) {
        std::vector<double> samples;
        for (const auto& a : rep.assets)
            if (a.pipeline == st.pipeline) samples.push_back(a.report.signals.bit_accuracy);
        rep.bit_accuracy_samples.emplace_back(st.pipeline, std::move(samples));
    }
    return rep;
}

struct RenderedArtifacts {
    std::string tables_md;
    std::string summary_csv;
    std::string bit_accuracy_csv;
};

namespace detail {

inline std::string fmt3(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

inline std::string pipeline_display_name(const std::string& id) {
    if (id == "baseline") return "Baseline";
    if (id == "watermarked") return "Watermarked";
    if (id == "honest") return "Honest Manifest";
    if (id == "misleading") return "Misleading Manifest";
    if (id == "misleading_jpeg") return "Misleading + JPEG Q80";
    if (id == "misleading_crop") return "Misleading + Crop 10% + Resize";
    if (id == "misleading_screenshot") return "Misleading + Screenshot Sim";
    if (id == "unmarked_misleading") return "Unmarked Misleading";
    return id;
}

inline std::string audit_row_label(const std::string& id) {
    if (id == "baseline") return "Q1 (Silent Zone)";
    if (id == "watermarked") return "Q2 (Fragile Provenance)";
    if (id == "unmarked_misleading") return "Q3 (Authenticated Content)";
    if (id == "honest") return "Q4a (Verified Synthetic)";
    if (id == "misleading") return "Q4b (Authenticated Fake), no perturbation";
    if (id == "misleading_jpeg") return "Q4b (Authenticated Fake), JPEG Q80";
    if (id == "misleading_crop") return "Q4b (Authenticated Fake), crop 10% + resize";
    if (id == "misleading_screenshot") return "Q4b (Authenticated Fake), screenshot sim";
    return id;
}

}  // namespace detail

// Deterministic 3-decimal rendering; rejects reports with empty conditions so
// missing data can never masquerade as zeros.
inline RenderedArtifacts render_tables(const ExperimentReport& rep) {
    if (rep.pipelines.empty()) throw std::invalid_argument("render_tables: no pipelines");
    for (const auto& st : rep.pipelines)
        if (st.n == 0) throw std::invalid_argument("render_tables: empty pipeline " + st.pipeline);
    for (const auto& [cond, samples] : rep.bit_accuracy_samples)
        if (samples.empty())
            throw std::invalid_argument("render_tables: no samples for condition " + cond);

    using detail::fmt3;
    RenderedArtifacts out;

    std::string& md = out.tables_md;
    md += "# Core pipeline results\n\n";
    md += "| Pipeline | N | C2PA Valid (%) | Avg. Bit Acc. | Min. Bit Acc. | Classified Correctly (%) |\n";
    md += "| --- | ---: | ---: | ---: | ---: | ---: |\n";
    for (const auto& st : rep.pipelines) {
        md += "| " + detail::pipeline_display_name(st.pipeline) + " | " + std::to_string(st.n) +
              " | " + fmt3(st.c2pa_valid_pct) + " | " + fmt3(st.mean_bit_accuracy) + " | " +
              fmt3(st.min_bit_accuracy) + " | " + fmt3(st.classified_correct_pct) + " |\n";
    }
    md += "\n# Cross-layer audit evaluation\n\n";
    md += "| State / Condition | Correctly Classified (%) |\n";
    md += "| --- | ---: |\n";
    for (const auto& st : rep.pipelines)
        md += "| " + detail::audit_row_label(st.pipeline) + " | " +
              fmt3(st.classified_correct_pct) + " |\n";
    md += "\nPositive class: Q4b. TPR: " + (rep.metrics.tpr ? fmt3(*rep.metrics.tpr) : "n/a") +
          ", FPR: " + fmt3(rep.metrics.fpr) + ", Accuracy: " + fmt3(rep.metrics.accuracy) + "\n";

    std::string& csv = out.summary_csv;
    csv += "pipeline,n,c2pa_valid_pct,mean_bit_accuracy,min_bit_accuracy,classified_correct_pct\n";
    for (const auto& st : rep.pipelines)
        csv += st.pipeline + "," + std::to_string(st.n) + "," + fmt3(st.c2pa_valid_pct) + "," +
               fmt3(st.mean_bit_accuracy) + "," + fmt3(st.min_bit_accuracy) + "," +
               fmt3(st.classified_correct_pct) + "\n";

    std::string& bits = out.bit_accuracy_csv;
    bits += "condition,index,bit_accuracy\n";
    for (const auto& [cond, samples] : rep.bit_accuracy_samples)
        for (std::size_t i = 0; i < samples.size(); ++i)
            bits += cond + "," + std::to_string(i) + "," + fmt3(samples[i]) + "\n";

    return out;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << text;
    if (!out) throw std::runtime_error("short write: " + path);
}

// Renders everything before writing anything, so a failure never leaves a
// partial artifact set that looks complete.
inline void write_artifacts(const ExperimentReport& rep, const std::string& dir) {
    const RenderedArtifacts art = render_tables(rep);
    const std::string report_json = report_to_json(rep).dump(2) + "\n";
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);
    write_text_file((base / "report.json").string(), report_json);
    write_text_file((base / "summary.csv").string(), art.summary_csv);
    write_text_file((base / "tables.md").string(), art.tables_md);
    write_text_file((base / "bit_accuracy.csv").string(), art.bit_accuracy_csv);
}

inline ExperimentReport run_matrix(const RunConfig& config) {
    ExperimentReport rep = compute_experiment(config);
    write_artifacts(rep, config.output_dir);
    return rep;
}

}  // namespace xprov
