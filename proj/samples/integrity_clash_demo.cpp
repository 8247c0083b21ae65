// End-to-end walkthrough: build an authenticated fake, then catch it.
//
// An AI-marked image is signed with a manifest claiming plain photo editing.
// Each verification layer, checked alone, is satisfied: the signature is
// valid and the watermark detects. Only the joint audit sees the clash (Q4b).
#include <cstdio>

#include <xprov/audit.hpp>
#include <xprov/container.hpp>
#include <xprov/corpus.hpp>
#include <xprov/harness.hpp>
#include <xprov/perturb.hpp>
#include <xprov/watermark.hpp>

using namespace xprov;

static void describe(const char* label, const AuditReport& r) {
    std::printf("%-22s manifest_valid=%-5s ai_disclosed=%-5s watermark=%-5s  -> %s%s\n", label,
                r.signals.manifest_valid ? "true" : "false",
                r.signals.ai_disclosed ? "true" : "false",
                r.signals.watermark_detected ? "true" : "false", to_string(r.quadrant),
                r.clash ? "  [CLASH]" : "");
}

int main() {
    // A generator-side watermark: payload and key fixed for the whole run.
    const Payload payload = random_payload(99);
    const WatermarkKey key{12345};
    const Image original = generate_image(corpus_record(7, 2), 512);
    const Image marked = embed(original, payload, key);
    std::printf("embedded 256-bit payload, psnr = %.2f dB\n\n", psnr(original, marked));

    // One signing identity; its root goes into the auditor's trust store.
    const CertChain chain = generate_cert_chain("Demo Editor");
    const TrustStore store = TrustStore{}.with_root(chain.root_der);
    const std::string when = now_rfc3339_utc();

    // Honest path: the manifest discloses AI origin. Both layers agree.
    AssetFile honest = asset_from_bytes(png_encode(marked));
    honest = sign_and_attach(honest, ManifestTemplate::honest, chain, when);
    describe("honest manifest:", audit_file(honest, payload, key, store, {}, "honest"));

    // Attack path: same pixels, but the manifest claims human editing and
    // omits the AI disclosure. It signs the perturbed bytes, so it verifies.
    Image attacked = apply(marked, Perturbation::jpeg_q80);
    AssetFile fake = asset_from_bytes(png_encode(attacked));
    fake = sign_and_attach(fake, ManifestTemplate::misleading, chain, when);
    describe("misleading manifest:", audit_file(fake, payload, key, store, {}, "fake"));

    // Control paths: one signal each.
    describe("no manifest:",
             audit_file(asset_from_bytes(png_encode(marked)), payload, key, store, {}, "bare"));
    describe("unmarked, unsigned:",
             audit_file(asset_from_bytes(png_encode(original)), payload, key, store, {}, "plain"));
    return 0;
}
