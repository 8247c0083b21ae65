// Cross-layer audit: evaluates the provenance manifest and the pixel
// watermark jointly and places each asset in a conflict-matrix quadrant.
//
//   Q1  no manifest, no watermark          Q4a manifest discloses AI + watermark
//   Q2  watermark only                     Q4b manifest omits AI, watermark fires
//   Q3  manifest only
//
// Q4b is the clash state: a cryptographically valid manifest whose content is
// contradicted by the embedded signal. Validity is signature-level; an
// untrusted issuer is reported as a note, never used to suppress the clash.
#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "xprov/container.hpp"
#include "xprov/manifest.hpp"
#include "xprov/watermark.hpp"

namespace xprov {

enum class Quadrant { Q1, Q2, Q3, Q4a, Q4b };

inline const char* to_string(Quadrant q) {
    switch (q) {
        case Quadrant::Q1: return "Q1";
        case Quadrant::Q2: return "Q2";
        case Quadrant::Q3: return "Q3";
        case Quadrant::Q4a: return "Q4a";
        case Quadrant::Q4b: return "Q4b";
    }
    return "?";
}

inline Quadrant quadrant_from_string(const std::string& s) {
    if (s == "Q1") return Quadrant::Q1;
    if (s == "Q2") return Quadrant::Q2;
    if (s == "Q3") return Quadrant::Q3;
    if (s == "Q4a") return Quadrant::Q4a;
    if (s == "Q4b") return Quadrant::Q4b;
    throw std::invalid_argument("unknown quadrant: " + s);
}

struct LayerSignals {
    bool manifest_valid = false;
    bool ai_disclosed = false;  // meaningful only when manifest_valid
    ManifestStatus trust = ManifestStatus::absent;
    bool watermark_detected = false;
    double bit_accuracy = 0.0;
};

struct AuditReport {
    std::string asset_id;
    LayerSignals signals;
    Quadrant quadrant = Quadrant::Q1;
    bool clash = false;  // true iff quadrant == Q4b
    std::vector<std::string> notes;
};

// Total over the 6 reachable triples; ai_disclosed without a valid manifest
// is unreachable by construction and rejected.
inline Quadrant classify(bool manifest_valid, bool ai_disclosed, bool watermark_detected) {
    if (ai_disclosed && !manifest_valid)
        throw std::invalid_argument("classify: ai_disclosed requires manifest_valid");
    if (!manifest_valid) return watermark_detected ? Quadrant::Q2 : Quadrant::Q1;
    if (!watermark_detected) return Quadrant::Q3;
    return ai_disclosed ? Quadrant::Q4a : Quadrant::Q4b;
}

// A claim discloses AI origin when its digitalSourceType URI ends in the
// trainedAlgorithmicMedia segment (case-sensitive).
inline bool claim_discloses_ai(const Claim& claim) {
    if (!claim.digital_source_type) return false;
    const std::string& uri = *claim.digital_source_type;
    const auto slash = uri.find_last_of('/');
    const std::string terminal = slash == std::string::npos ? uri : uri.substr(slash + 1);
    return terminal == "trainedAlgorithmicMedia";
}

inline AuditReport audit_file(const AssetFile& file, const Payload& target, const WatermarkKey& key,
                              const TrustStore& store, const EmbedConfig& cfg = {},
                              const std::string& asset_id = "") {
    AuditReport report;
    report.asset_id = asset_id;

    std::optional<std::vector<std::uint8_t>> envelope;
    try {
        envelope = extract_manifest(file);
    } catch (const StructuralError& e) {
        report.notes.push_back(std::string("structural-error: ") + e.what());
    }
    if (envelope) {
        const auto [status, claim] = verify_envelope(*envelope, exclusion_hash(file), store);
        report.signals.trust = status;
        report.signals.manifest_valid =
            status == ManifestStatus::valid_untrusted || status == ManifestStatus::valid_trusted;
        if (report.signals.manifest_valid && claim)
            report.signals.ai_disclosed = claim_discloses_ai(*claim);
        if (status == ManifestStatus::valid_untrusted)
            report.notes.push_back("untrusted-issuer: root certificate not in trust store");
        if (status == ManifestStatus::invalid)
            report.notes.push_back("manifest present but failed verification");
    }

    const DetectionResult det = detect(decode_pixels(file), target, key, cfg);
    report.signals.watermark_detected = det.detected;
    report.signals.bit_accuracy = det.bit_accuracy;

    report.quadrant = classify(report.signals.manifest_valid, report.signals.ai_disclosed,
                               report.signals.watermark_detected);
    report.clash = report.quadrant == Quadrant::Q4b;
    return report;
}

struct Metrics {
    std::optional<double> tpr;  // empty when there are no Q4b truths
    double fpr = 0.0;
    double accuracy = 0.0;
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t positives = 0;   // ground-truth Q4b count
    std::size_t negatives = 0;   // ground-truth non-Q4b count
    std::size_t correct = 0;     // exact quadrant matches over all 5 classes
    std::size_t total = 0;
};

inline Metrics compute_metrics(const std::vector<AuditReport>& reports,
                               const std::vector<Quadrant>& ground_truth) {
    if (reports.size() != ground_truth.size())
        throw std::invalid_argument("compute_metrics: reports/ground_truth length mismatch");
    Metrics m;
    m.total = reports.size();
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const bool truth_pos = ground_truth[i] == Quadrant::Q4b;
        const bool pred_pos = reports[i].quadrant == Quadrant::Q4b;
        if (truth_pos) ++m.positives; else ++m.negatives;
        if (truth_pos && pred_pos) ++m.true_positives;
        if (!truth_pos && pred_pos) ++m.false_positives;
        if (reports[i].quadrant == ground_truth[i]) ++m.correct;
    }
    if (m.positives > 0)
        m.tpr = static_cast<double>(m.true_positives) / static_cast<double>(m.positives);
    m.fpr = m.negatives > 0
                ? static_cast<double>(m.false_positives) / static_cast<double>(m.negatives)
                : 0.0;
    m.accuracy = m.total > 0 ? static_cast<double>(m.correct) / static_cast<double>(m.total) : 0.0;
    return m;
}

}  // namespace xprov
