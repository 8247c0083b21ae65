// Command-line front end for the cross-layer provenance toolkit.
//
// Subcommands mirror the library layers: gen-corpus, embed, detect, gen-cert,
// sign, perturb, audit, run-matrix, report. `audit` exits 0 when no clash is
// found and 2 when any asset lands in Q4b, so shell pipelines can red-flag
// authenticated fakes directly.
#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <xprov/audit.hpp>
#include <xprov/codec.hpp>
#include <xprov/container.hpp>
#include <xprov/corpus.hpp>
#include <xprov/harness.hpp>
#include <xprov/manifest.hpp>
#include <xprov/perturb.hpp>
#include <xprov/watermark.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int cmd_gen_corpus(std::uint64_t seed, int count, int size, const std::string& out_dir) {
    fs::create_directories(out_dir);
    json records = json::array();
    for (int i = 0; i < count; ++i) {
        const auto rec = xprov::corpus_record(seed, static_cast<std::uint64_t>(i));
        const xprov::Image img = xprov::generate_image(rec, size);
        char name[32];
        std::snprintf(name, sizeof name, "img_%04llu.png",
                      static_cast<unsigned long long>(rec.index));
        xprov::write_binary_file((fs::path(out_dir) / name).string(), xprov::png_encode(img));
        records.push_back({{"index", rec.index},
                           {"kind", xprov::to_string(rec.kind)},
                           {"seed", rec.seed}});
    }
    xprov::write_text_file((fs::path(out_dir) / "corpus.json").string(), records.dump(2) + "\n");
    std::cout << "wrote " << count << " images to " << out_dir << "\n";
    return 0;
}

int cmd_embed(const std::string& in, const std::string& out, const std::string& payload_hex,
              std::uint64_t key_seed, double alpha) {
    const xprov::Payload payload = xprov::payload_from_hex(payload_hex);
    xprov::EmbedConfig cfg;
    cfg.strength_alpha = alpha;
    const xprov::Image src = xprov::decode_pixels(xprov::load_asset(in));
    const xprov::Image marked = xprov::embed(src, payload, xprov::WatermarkKey{key_seed}, cfg);
    xprov::write_binary_file(out, xprov::png_encode(marked));
    std::cout << json{{"psnr", xprov::psnr(src, marked)}}.dump() << "\n";
    return 0;
}

int cmd_detect(const std::string& in, const std::string& payload_hex, std::uint64_t key_seed,
               double threshold) {
    const xprov::Payload payload = xprov::payload_from_hex(payload_hex);
    xprov::EmbedConfig cfg;
    cfg.detection_threshold = threshold;
    const xprov::Image img = xprov::decode_pixels(xprov::load_asset(in));
    const auto res = xprov::detect(img, payload, xprov::WatermarkKey{key_seed}, cfg);
    std::cout << json{{"bit_accuracy", res.bit_accuracy},
                      {"detected", res.detected},
                      {"best_sync_scale", res.best_sync_scale}}
                     .dump()
              << "\n";
    return 0;
}

int cmd_gen_cert(const std::string& subject, const std::string& out,
                 const std::string& root_out) {
    const xprov::CertChain chain = xprov::generate_cert_chain(subject);
    xprov::write_text_file(out, xprov::chain_to_pem(chain));
    if (!root_out.empty()) xprov::write_text_file(root_out, xprov::root_to_pem(chain.root_der));
    std::cout << "wrote signing chain to " << out << "\n";
    return 0;
}

int cmd_sign(const std::string& in, const std::string& out, const std::string& tmpl,
             const std::string& cert_path, const std::string& signed_at) {
    const xprov::CertChain chain = xprov::chain_from_pem(xprov::read_text_file(cert_path));
    const xprov::ManifestTemplate t = tmpl == "honest" ? xprov::ManifestTemplate::honest
                                                       : xprov::ManifestTemplate::misleading;
    const std::string when = signed_at.empty() ? xprov::now_rfc3339_utc() : signed_at;
    const xprov::AssetFile signed_file =
        xprov::sign_and_attach(xprov::load_asset(in), t, chain, when);
    xprov::write_binary_file(out, signed_file.bytes);
    std::cout << "signed " << in << " -> " << out << " (" << tmpl << ")\n";
    return 0;
}

int cmd_perturb(const std::string& kind, const std::string& in, const std::string& out) {
    const xprov::Perturbation p = xprov::perturbation_from_string(kind);
    const xprov::Image img = xprov::decode_pixels(xprov::load_asset(in));
    xprov::write_binary_file(out, xprov::png_encode(xprov::apply(img, p)));
    return 0;
}

int cmd_audit(const std::string& in, const std::string& payload_hex, std::uint64_t key_seed,
              const std::string& trust_path, const std::string& out, double threshold) {
    const xprov::Payload payload = xprov::payload_from_hex(payload_hex);
    xprov::TrustStore store;
    if (!trust_path.empty())
        store = xprov::trust_store_from_pem(xprov::read_text_file(trust_path));
    xprov::EmbedConfig cfg;
    cfg.detection_threshold = threshold;

    std::vector<fs::path> paths;
    if (fs::is_directory(in)) {
        for (const auto& entry : fs::directory_iterator(in)) {
            const std::string ext = entry.path().extension().string();
            if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") paths.push_back(entry.path());
        }
        std::sort(paths.begin(), paths.end());
    } else {
        paths.emplace_back(in);
    }
    if (paths.empty()) throw std::runtime_error("audit: no PNG/JPEG files under " + in);

    json aggregate = json::array();
    bool any_clash = false;
    for (const auto& p : paths) {
        const auto report = xprov::audit_file(xprov::load_asset(p.string()), payload,
                                              xprov::WatermarkKey{key_seed}, store, cfg,
                                              p.filename().string());
        const json j = xprov::audit_report_to_json(report);
        std::cout << j.dump() << "\n";
        aggregate.push_back(j);
        any_clash = any_clash || report.clash;
    }
    if (!out.empty()) xprov::write_text_file(out, aggregate.dump(2) + "\n");
    return any_clash ? 2 : 0;
}

int cmd_run_matrix(const std::string& config_path, std::uint64_t seed, int n, int size,
                   int parallelism, const std::string& output_dir, bool enable_q3) {
    xprov::RunConfig cfg;
    if (!config_path.empty()) cfg = xprov::load_config(config_path);
    if (seed != 0) cfg.master_seed = seed;
    if (n > 0) cfg.n = n;
    if (size > 0) cfg.size = size;
    if (parallelism >= 0) cfg.parallelism = parallelism;
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    if (enable_q3) cfg.enable_q3_pipeline = true;
    const auto report = xprov::run_matrix(cfg);
    std::cout << xprov::render_tables(report).tables_md;
    std::cout << "\nartifacts written to " << cfg.output_dir << "\n";
    return 0;
}

int cmd_report(const std::string& in, const std::string& out_dir) {
    json j = json::parse(xprov::read_text_file(in));
    const xprov::ExperimentReport rep = xprov::report_from_json(j);
    const auto art = xprov::render_tables(rep);
    if (out_dir.empty()) {
        std::cout << art.tables_md;
        return 0;
    }
    fs::create_directories(out_dir);
    xprov::write_text_file((fs::path(out_dir) / "summary.csv").string(), art.summary_csv);
    xprov::write_text_file((fs::path(out_dir) / "tables.md").string(), art.tables_md);
    xprov::write_text_file((fs::path(out_dir) / "bit_accuracy.csv").string(),
                           art.bit_accuracy_csv);
    std::cout << "rendered artifacts to " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cross-layer provenance toolkit: watermark vs. manifest audit"};
    app.require_subcommand(1);

    std::uint64_t seed = 7, key_seed = 0;
    int count = 50, size = 512, parallelism = -1, mx_n = 0, mx_size = 0;
    std::uint64_t mx_seed = 0;
    double alpha = 3.0, threshold = 0.75;
    std::string in, out, out_dir, payload_hex, tmpl = "misleading", cert_path, trust_path;
    std::string subject = "Provenance Demo", root_out, config_path, signed_at, kind;
    bool enable_q3 = false;

    auto* gen = app.add_subcommand("gen-corpus", "generate the procedural image corpus");
    gen->add_option("--seed", seed, "master seed")->capture_default_str();
    gen->add_option("--count", count, "number of images")->capture_default_str();
    gen->add_option("--size", size, "square image size in pixels")->capture_default_str();
    gen->add_option("--out", out_dir, "output directory")->required();

    auto* emb = app.add_subcommand("embed", "embed a 256-bit payload into an image");
    emb->add_option("--in", in)->required();
    emb->add_option("--out", out)->required();
    emb->add_option("--payload", payload_hex, "64-hex-char payload")->required();
    emb->add_option("--key", key_seed, "watermark key seed")->required();
    emb->add_option("--alpha", alpha, "embedding strength")->capture_default_str();

    auto* det = app.add_subcommand("detect", "detect a payload and print the result as JSON");
    det->add_option("--in", in)->required();
    det->add_option("--payload", payload_hex)->required();
    det->add_option("--key", key_seed)->required();
    det->add_option("--threshold", threshold)->capture_default_str();

    auto* gc = app.add_subcommand("gen-cert", "generate a self-signed root + leaf signing chain");
    gc->add_option("--subject", subject)->capture_default_str();
    gc->add_option("--out", out, "chain PEM (leaf cert, root cert, private key)")->required();
    gc->add_option("--root-out", root_out, "optional root-only PEM for the trust store");

    auto* sgn = app.add_subcommand("sign", "attach a signed manifest to a PNG/JPEG");
    sgn->add_option("--in", in)->required();
    sgn->add_option("--out", out)->required();
    sgn->add_option("--template", tmpl)->check(CLI::IsMember({"honest", "misleading"}))
        ->capture_default_str();
    sgn->add_option("--cert", cert_path, "chain PEM from gen-cert")->required();
    sgn->add_option("--signed-at", signed_at, "RFC3339 claim time (default: now)");

    auto* per = app.add_subcommand("perturb", "apply a fixed perturbation");
    per->add_option("--kind", kind)->check(
           CLI::IsMember({"jpeg_q80", "jpeg", "crop10_resize", "crop10", "screenshot_sim",
                          "screenshot", "none"}))
        ->required();
    per->add_option("--in", in)->required();
    per->add_option("--out", out)->required();

    auto* aud = app.add_subcommand("audit", "audit files; exit 2 if any authenticated fake");
    aud->add_option("--in", in, "file or directory")->required();
    aud->add_option("--payload", payload_hex)->required();
    aud->add_option("--key", key_seed)->required();
    aud->add_option("--trust", trust_path, "PEM of trusted root certificates");
    aud->add_option("--out", out, "aggregate JSON report path");
    aud->add_option("--threshold", threshold)->capture_default_str();

    auto* mx = app.add_subcommand("run-matrix", "run the full pipeline matrix");
    mx->add_option("--config", config_path, "JSON config file");
    mx->add_option("--seed", mx_seed, "override master_seed");
    mx->add_option("--n", mx_n, "override corpus size");
    mx->add_option("--size", mx_size, "override image size");
    mx->add_option("--parallelism", parallelism, "override worker count");
    mx->add_option("--output-dir", out_dir, "override output directory");
    mx->add_flag("--enable-q3", enable_q3, "add the unmarked-misleading (Q3) pipeline");

    auto* rep = app.add_subcommand("report", "re-render artifacts from a report.json");
    rep->add_option("--in", in)->required();
    rep->add_option("--out-dir", out_dir, "write files here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_corpus(seed, count, size, out_dir);
        if (emb->parsed()) return cmd_embed(in, out, payload_hex, key_seed, alpha);
        if (det->parsed()) return cmd_detect(in, payload_hex, key_seed, threshold);
        if (gc->parsed()) return cmd_gen_cert(subject, out, root_out);
        if (sgn->parsed()) return cmd_sign(in, out, tmpl, cert_path, signed_at);
        if (per->parsed()) return cmd_perturb(kind, in, out);
        if (aud->parsed()) return cmd_audit(in, payload_hex, key_seed, trust_path, out, threshold);
        if (mx->parsed())
            return cmd_run_matrix(config_path, mx_seed, mx_n, mx_size, parallelism, out_dir,
                                  enable_q3);
        if (rep->parsed()) return cmd_report(in, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
