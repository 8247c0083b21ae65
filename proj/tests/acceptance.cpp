// Release gate for the toolkit: every blocking behaviour is probed end to end
// and reported as one [PASS]/[FAIL] line with the statistics behind the
// verdict.  --standard runs the n=50 / 512x512 criteria (1-8); --large runs
// the n=500 / 1024x1024 smoke (criterion 9); with no flag both stages run.
// Exit code is 0 only when every executed criterion passes.
#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include <xprov/audit.hpp>
#include <xprov/codec.hpp>
#include <xprov/container.hpp>
#include <xprov/corpus.hpp>
#include <xprov/harness.hpp>
#include <xprov/manifest.hpp>
#include <xprov/perturb.hpp>
#include <xprov/watermark.hpp>

using namespace xprov;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string f3(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

struct Scoreboard {
    int failed = 0;

    void report(int index, const std::string& name, bool ok, double secs,
                const std::string& detail) {
        if (!ok) ++failed;
        std::printf("[%s] %d. %s: %s (%.1fs)\n", ok ? "PASS" : "FAIL", index, name.c_str(),
                    detail.c_str(), secs);
        std::fflush(stdout);
    }
};

// Shared inputs for criteria 1-8. The corpus, payload, and key match the
// run-matrix defaults so the standalone probes and the full matrix agree.
struct StandardContext {
    RunConfig cfg;
    EmbedConfig ecfg;
    std::vector<std::pair<Image, CorpusRecord>> corpus;
    Payload payload;
    WatermarkKey key{0};
    PatternField field;
    CertChain chain;
    TrustStore store;
    std::string signed_at = "2026-01-01T00:00:00Z";

    std::vector<Image> watermarked;  // filled by criterion 2
    std::vector<double> clean_acc;   // detection accuracy per image, criterion 2
    std::string report_p1;           // report.json bytes from the parallelism-1 run
};

StandardContext make_standard_context() {
    StandardContext sc;
    sc.ecfg = embed_config(sc.cfg);
    sc.corpus = generate_corpus(sc.cfg.master_seed, sc.cfg.n, sc.cfg.size);
    sc.payload = run_payload(sc.cfg);
    sc.key = run_key(sc.cfg);
    sc.field = derive_patterns(sc.key, sc.ecfg);
    sc.chain = generate_cert_chain("Acceptance Signer");
    sc.store = TrustStore{}.with_root(sc.chain.root_der);
    return sc;
}

// 1. Unwatermarked images must sit at chance accuracy and never detect.
void criterion_null_detection(Scoreboard& sb, const StandardContext& sc) {
    const auto t0 = Clock::now();
    double sum = 0.0, mx = 0.0;
    int detections = 0;
    for (const auto& [img, rec] : sc.corpus) {
        const DetectionResult r = detect(img, sc.payload, sc.field, sc.ecfg);
        sum += r.bit_accuracy;
        mx = std::max(mx, r.bit_accuracy);
        if (r.detected) ++detections;
    }
    const double mean = sum / static_cast<double>(sc.corpus.size());
    const double secs = seconds_since(t0);
    const bool ok =
        detections == 0 && mean >= 0.47 && mean <= 0.53 && mx <= 0.65 && secs < 60.0;
    sb.report(1, "null detection on unwatermarked images", ok, secs,
              std::to_string(detections) + " detections, mean accuracy " + f3(mean) +
                  ", max " + f3(mx));
}

// 2. Embed then detect with no perturbation recovers the payload.
void criterion_clean_round_trip(Scoreboard& sb, StandardContext& sc) {
    const auto t0 = Clock::now();
    sc.watermarked.clear();
    sc.clean_acc.clear();
    bool ok = true;
    double mn = 1.0;
    std::size_t exact = 0;
    for (const auto& [img, rec] : sc.corpus) {
        sc.watermarked.push_back(embed(img, sc.payload, sc.field, sc.ecfg));
        const DetectionResult r = detect(sc.watermarked.back(), sc.payload, sc.field, sc.ecfg);
        sc.clean_acc.push_back(r.bit_accuracy);
        mn = std::min(mn, r.bit_accuracy);
        if (r.bit_accuracy == 1.0) ++exact;
        if (!r.detected || r.bit_accuracy < 0.97) ok = false;
    }
    sb.report(2, "clean embed/detect round trip", ok, seconds_since(t0),
              "min accuracy " + f3(mn) + ", " + std::to_string(exact) + "/" +
                  std::to_string(sc.corpus.size()) + " images at 1.000");
}

// 3. Attaching a signed manifest is a pure metadata operation: decoded pixels
//    and detection results are bit-identical before and after signing.
void criterion_signing_pixel_invariance(Scoreboard& sb, const StandardContext& sc) {
    const auto t0 = Clock::now();
    std::size_t identical = 0, total = 0, acc_equal = 0;
    for (std::size_t i = 0; i < sc.watermarked.size(); ++i) {
        const AssetFile plain = asset_from_bytes(png_encode(sc.watermarked[i]));
        Image decoded_honest{1, 1};
        for (const ManifestTemplate tmpl :
             {ManifestTemplate::honest, ManifestTemplate::misleading}) {
            const AssetFile attached = sign_and_attach(plain, tmpl, sc.chain, sc.signed_at);
            const Image decoded = decode_pixels(attached);
            ++total;
            if (decoded == sc.watermarked[i]) ++identical;
            if (tmpl == ManifestTemplate::honest) decoded_honest = decoded;
        }
        const DetectionResult r = detect(decoded_honest, sc.payload, sc.field, sc.ecfg);
        if (r.bit_accuracy == sc.clean_acc[i]) ++acc_equal;
    }
    const bool ok = total == 2 * sc.watermarked.size() && identical == total &&
                    acc_equal == sc.watermarked.size() && !sc.watermarked.empty();
    sb.report(3, "signing leaves pixels untouched", ok, seconds_since(t0),
              std::to_string(identical) + "/" + std::to_string(total) +
                  " signed copies pixel-identical, " + std::to_string(acc_equal) + "/" +
                  std::to_string(sc.watermarked.size()) + " accuracies unchanged");
}

// 4. Every perturbed watermarked image stays above the detection threshold.
void criterion_perturbation_survival(Scoreboard& sb, const StandardContext& sc) {
    struct Case {
        const char* name;
        Perturbation perturbation;
        double floor;
        double mn = 1.0;
        bool all_detected = true;
    };
    std::vector<Case> cases{{"jpeg", Perturbation::jpeg_q80, 0.95},
                            {"crop", Perturbation::crop10_resize, 0.80},
                            {"screenshot", Perturbation::screenshot_sim, 0.80}};
    const auto t0 = Clock::now();
    for (auto& c : cases) {
        for (const Image& img : sc.watermarked) {
            const DetectionResult r =
                detect(apply(img, c.perturbation), sc.payload, sc.field, sc.ecfg);
            c.mn = std::min(c.mn, r.bit_accuracy);
            if (!r.detected) c.all_detected = false;
        }
    }
    const double secs = seconds_since(t0);
    bool ok = !sc.watermarked.empty() && secs < 300.0;
    std::string detail = "min accuracy";
    for (const auto& c : cases) {
        if (!c.all_detected || c.mn < c.floor) ok = false;
        detail += std::string(" ") + c.name + " " + f3(c.mn);
    }
    sb.report(4, "perturbation survival above threshold", ok, secs, detail);
}

// 5. The full matrix classifies every asset into its expected quadrant.
void criterion_audit_exactness(Scoreboard& sb, StandardContext& sc) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "xprov_acceptance_p1";
    fs::remove_all(dir);
    RunConfig cfg = sc.cfg;
    cfg.parallelism = 1;
    cfg.output_dir = dir.string();
    const auto t0 = Clock::now();
    const ExperimentReport rep = run_matrix(cfg);
    const double secs = seconds_since(t0);
    sc.report_p1 = read_text_file((dir / "report.json").string());
    fs::remove_all(dir);

    bool rows_ok = !rep.pipelines.empty();
    for (const auto& st : rep.pipelines)
        if (st.classified_correct_pct != 100.0) rows_ok = false;
    const bool ok = rep.assets.size() == 350u && rep.metrics.tpr &&
                    *rep.metrics.tpr == 1.0 && rep.metrics.fpr == 0.0 &&
                    rep.metrics.accuracy == 1.0 && rows_ok;
    sb.report(5, "audit exactness over the full matrix", ok, secs,
              "TPR " + (rep.metrics.tpr ? f3(*rep.metrics.tpr) : std::string("n/a")) +
                  ", FPR " + f3(rep.metrics.fpr) + ", accuracy " + f3(rep.metrics.accuracy) +
                  ", " + std::to_string(rep.assets.size()) + " assets");
}

// 6. Tampering is caught on all three axes: claim mutation, manifest
//    stripping, and re-encoding behind an already-signed manifest.
void criterion_tamper_suite(Scoreboard& sb, const StandardContext& sc) {
    const auto t0 = Clock::now();
    const AssetFile base =
        sign_and_attach(asset_from_bytes(png_encode(sc.watermarked.at(0))),
                        ManifestTemplate::misleading, sc.chain, sc.signed_at);
    const std::vector<std::uint8_t> envelope = *extract_manifest(base);
    const std::string hash = exclusion_hash(base);

    // Locate the claim object inside the envelope text. Claim values carry no
    // brace characters, so plain depth counting finds the exact span.
    const std::string env(envelope.begin(), envelope.end());
    const std::size_t open = env.find('{', env.find("\"claim\""));
    std::size_t close = 0;
    for (std::size_t i = open, depth = 0; i < env.size(); ++i) {
        if (env[i] == '{') ++depth;
        if (env[i] == '}' && --depth == 0) {
            close = i + 1;
            break;
        }
    }

    std::mt19937 rng(20260823u);
    std::uniform_int_distribution<std::size_t> pos_dist(open, close - 1);
    std::uniform_int_distribution<int> byte_dist(0, 255);
    int rejected = 0;
    for (int k = 0; k < 100; ++k) {
        std::vector<std::uint8_t> mutated = envelope;
        const std::size_t pos = pos_dist(rng);
        std::uint8_t b = static_cast<std::uint8_t>(byte_dist(rng));
        while (b == mutated[pos]) b = static_cast<std::uint8_t>(byte_dist(rng));
        mutated[pos] = b;
        if (verify_envelope(mutated, hash, sc.store).first == ManifestStatus::invalid)
            ++rejected;
    }

    std::size_t transitions = 0;
    for (const Image& img : sc.watermarked) {
        const AssetFile f = sign_and_attach(asset_from_bytes(png_encode(img)),
                                            ManifestTemplate::misleading, sc.chain, sc.signed_at);
        const AuditReport before = audit_file(f, sc.payload, sc.key, sc.store, sc.ecfg);
        const AuditReport after =
            audit_file(strip_manifest(f), sc.payload, sc.key, sc.store, sc.ecfg);
        if (before.quadrant == Quadrant::Q4b && before.clash &&
            after.quadrant == Quadrant::Q2)
            ++transitions;
    }

    const AssetFile reencoded = attach_manifest(
        asset_from_bytes(jpeg_encode(decode_pixels(base), 90)), envelope);
    const ManifestStatus status =
        verify_envelope(*extract_manifest(reencoded), exclusion_hash(reencoded), sc.store)
            .first;

    const bool ok = rejected == 100 && transitions == sc.watermarked.size() &&
                    !sc.watermarked.empty() && status == ManifestStatus::invalid;
    sb.report(6, "tamper detection suite", ok, seconds_since(t0),
              std::to_string(rejected) + "/100 mutations rejected, " +
                  std::to_string(transitions) + "/" + std::to_string(sc.watermarked.size()) +
                  " strip transitions Q4b->Q2, re-encode " + to_string(status));
}

// 7. The honest and misleading claims differ in exactly the disclosure
//    fields, and both verify under the same chain.
void criterion_disclosure_diff(Scoreboard& sb, const StandardContext& sc) {
    const auto t0 = Clock::now();
    const std::string hash = sha256_hex(std::vector<std::uint8_t>{0x01, 0x02, 0x03});
    const Claim honest = make_honest_claim(hash, sc.signed_at);
    const Claim misleading = make_misleading_claim(hash, sc.signed_at);
    const nlohmann::json jh = claim_to_json(honest);
    const nlohmann::json jm = claim_to_json(misleading);
    std::set<std::string> diff;
    for (const auto& [k, v] : jh.items())
        if (!jm.contains(k) || jm.at(k) != v) diff.insert(k);
    for (const auto& [k, v] : jm.items())
        if (!jh.contains(k)) diff.insert(k);

    const ManifestStatus sh = verify(sign(honest, sc.chain), hash, sc.store).first;
    const ManifestStatus sm = verify(sign(misleading, sc.chain), hash, sc.store).first;
    const bool ok =
        diff == std::set<std::string>{"action", "digitalSourceType", "softwareAgent"} &&
        sh == ManifestStatus::valid_trusted && sm == ManifestStatus::valid_trusted;
    std::string fields;
    for (const auto& k : diff) fields += (fields.empty() ? "" : ", ") + k;
    sb.report(7, "claims differ only in disclosure fields", ok, seconds_since(t0),
              "diff {" + fields + "}, honest " + to_string(sh) + ", misleading " +
                  to_string(sm));
}

// 8. report.json is byte-identical across parallelism degrees.
void criterion_determinism(Scoreboard& sb, const StandardContext& sc) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "xprov_acceptance_p4";
    fs::remove_all(dir);
    RunConfig cfg = sc.cfg;
    cfg.parallelism = 4;
    cfg.output_dir = dir.string();
    const auto t0 = Clock::now();
    run_matrix(cfg);
    const double secs = seconds_since(t0);
    const std::string report_p4 = read_text_file((dir / "report.json").string());
    fs::remove_all(dir);
    const bool ok = !sc.report_p1.empty() && report_p4 == sc.report_p1;
    sb.report(8, "byte-identical reports across parallelism", ok, secs,
              std::to_string(sc.report_p1.size()) + " vs " + std::to_string(report_p4.size()) +
                  " bytes, " + (ok ? "identical" : "different"));
}

// 9. The large configuration completes and emits one audit per asset.
void criterion_large_scale(Scoreboard& sb) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "xprov_acceptance_large";
    fs::remove_all(dir);
    RunConfig cfg;
    cfg.n = 500;
    cfg.size = 1024;
    cfg.parallelism = 0;
    cfg.output_dir = dir.string();
    const auto t0 = Clock::now();
    const ExperimentReport rep = run_matrix(cfg);
    const double secs = seconds_since(t0);
    fs::remove_all(dir);
    const bool ok = rep.assets.size() == 3500u && secs < 7200.0;
    sb.report(9, "large-scale run (n=500 at 1024x1024)", ok, secs,
              std::to_string(rep.assets.size()) + " audit reports, TPR " +
                  (rep.metrics.tpr ? f3(*rep.metrics.tpr) : std::string("n/a")) + ", FPR " +
                  f3(rep.metrics.fpr) + ", accuracy " + f3(rep.metrics.accuracy));
}

}  // namespace

int main(int argc, char** argv) {
    bool standard = false, large = false;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--standard") standard = true;
        else if (arg == "--large") large = true;
        else {
            std::fprintf(stderr, "usage: acceptance [--standard] [--large]\n");
            return 2;
        }
    }
    if (!standard && !large) standard = large = true;

    Scoreboard sb;
    try {
        if (standard) {
            StandardContext sc = make_standard_context();
            criterion_null_detection(sb, sc);
            criterion_clean_round_trip(sb, sc);
            criterion_signing_pixel_invariance(sb, sc);
            criterion_perturbation_survival(sb, sc);
            criterion_audit_exactness(sb, sc);
            criterion_tamper_suite(sb, sc);
            criterion_disclosure_diff(sb, sc);
            criterion_determinism(sb, sc);
        }
        if (large) criterion_large_scale(sb);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "fatal: %s\n", e.what());
        return 1;
    }
    if (sb.failed == 0)
        std::printf("all criteria passed\n");
    else
        std::printf("%d criterion(s) failed\n", sb.failed);
    return sb.failed == 0 ? 0 : 1;
}
