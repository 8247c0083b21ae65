// Signed provenance manifests: claims, an ECDSA P-256 certificate chain, and
// signature verification against a trust store. A manifest certifies that its
// claim bytes are unmodified and attributable to a key; it says nothing about
// whether the claim is true. Serialized claim keys follow the C2PA-style
// camelCase spelling (action, digitalSourceType, softwareAgent, ...).
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <openssl/bio.h>
#include <openssl/err.h>
#include <openssl/evp.h>
#include <openssl/pem.h>
#include <openssl/x509.h>

#include <json.hpp>

namespace xprov {

class CryptoError : public std::runtime_error {
public:
    explicit CryptoError(const std::string& msg) : std::runtime_error(msg) {}
};

inline constexpr const char* kHonestAction = "c2pa.created";
inline constexpr const char* kMisleadingAction = "c2pa.edited";
inline constexpr const char* kHonestSourceType =
    "http://cv.iptc.org/newscodes/digitalsourcetype/trainedAlgorithmicMedia";
inline constexpr const char* kHonestAgent = "StableDiffusionXL/1.0";
inline constexpr const char* kMisleadingAgent = "PhotoEditor/2.0";

struct Claim {
    std::string action;
    std::optional<std::string> digital_source_type;
    std::string software_agent;
    std::string signed_at;   // RFC3339 UTC, informational
    std::string asset_hash;  // 64 hex chars, SHA-256 of the manifest-stripped file

    friend bool operator==(const Claim&, const Claim&) = default;
};

enum class ManifestStatus { absent, invalid, valid_untrusted, valid_trusted };

inline const char* to_string(ManifestStatus s) {
    switch (s) {
        case ManifestStatus::absent: return "absent";
        case ManifestStatus::invalid: return "invalid";
        case ManifestStatus::valid_untrusted: return "valid_untrusted";
        case ManifestStatus::valid_trusted: return "valid_trusted";
    }
    return "unknown";
}

inline ManifestStatus manifest_status_from_string(const std::string& s) {
    if (s == "absent") return ManifestStatus::absent;
    if (s == "invalid") return ManifestStatus::invalid;
    if (s == "valid_untrusted") return ManifestStatus::valid_untrusted;
    if (s == "valid_trusted") return ManifestStatus::valid_trusted;
    throw std::invalid_argument("unknown manifest status: " + s);
}

namespace detail {

struct EvpPkeyDeleter {
    void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct X509Deleter {
    void operator()(X509* p) const { X509_free(p); }
};
struct BioDeleter {
    void operator()(BIO* p) const { BIO_free(p); }
};

using EvpPkeyPtr = std::unique_ptr<EVP_PKEY, EvpPkeyDeleter>;
using X509Ptr = std::unique_ptr<X509, X509Deleter>;
using BioPtr = std::unique_ptr<BIO, BioDeleter>;

[[noreturn]] inline void throw_openssl(const std::string& what) {
    const unsigned long e = ERR_get_error();
    char buf[256] = {0};
    if (e) ERR_error_string_n(e, buf, sizeof(buf));
    throw CryptoError(what + (e ? std::string(": ") + buf : std::string()));
}

inline bool is_hex_digest(const std::string& s) {
    if (s.size() != 64) return false;
    for (char c : s) {
        const bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
        if (!ok) return false;
    }
    return true;
}

inline std::vector<std::uint8_t> x509_to_der(X509* cert) {
    unsigned char* buf = nullptr;
    const int len = i2d_X509(cert, &buf);
    if (len <= 0) throw_openssl("i2d_X509");
    std::vector<std::uint8_t> der(buf, buf + len);
    OPENSSL_free(buf);
    return der;
}

inline X509Ptr der_to_x509(const std::vector<std::uint8_t>& der) {
    const unsigned char* p = der.data();
    X509* cert = d2i_X509(nullptr, &p, static_cast<long>(der.size()));
    if (!cert) throw_openssl("d2i_X509");
    return X509Ptr(cert);
}

inline std::string base64_encode(const std::vector<std::uint8_t>& data) {
    std::string out;
    out.resize(4 * ((data.size() + 2) / 3) + 1);
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data.data(),
                                  static_cast<int>(data.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

inline std::vector<std::uint8_t> base64_decode(const std::string& text) {
    if (text.size() % 4 != 0) throw CryptoError("base64: length not a multiple of 4");
    std::vector<std::uint8_t> out(3 * (text.size() / 4) + 1);
    const int n = EVP_DecodeBlock(out.data(),
                                  reinterpret_cast<const unsigned char*>(text.data()),
                                  static_cast<int>(text.size()));
    if (n < 0) throw CryptoError("base64: invalid input");
    std::size_t pad = 0;
    if (!text.empty() && text[text.size() - 1] == '=') ++pad;
    if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

}  // namespace detail

// SHA-256 as a lowercase hex digest.
inline std::string sha256_hex(const std::uint8_t* data, std::size_t len) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int md_len = 0;
    if (EVP_Digest(data, len, md, &md_len, EVP_sha256(), nullptr) != 1)
        detail::throw_openssl("EVP_Digest");
    static const char* digits = "0123456789abcdef";
    std::string hex(md_len * 2, '0');
    for (unsigned int i = 0; i < md_len; ++i) {
        hex[2 * i] = digits[md[i] >> 4];
        hex[2 * i + 1] = digits[md[i] & 0xF];
    }
    return hex;
}

inline std::string sha256_hex(const std::vector<std::uint8_t>& data) {
    return sha256_hex(data.data(), data.size());
}

inline Claim make_honest_claim(const std::string& asset_hash, const std::string& signed_at) {
    if (!detail::is_hex_digest(asset_hash))
        throw std::invalid_argument("make_honest_claim: asset_hash must be 64 hex characters");
    Claim c;
    c.action = kHonestAction;
    c.digital_source_type = kHonestSourceType;
    c.software_agent = kHonestAgent;
    c.signed_at = signed_at;
    c.asset_hash = asset_hash;
    return c;
}

inline Claim make_misleading_claim(const std::string& asset_hash, const std::string& signed_at) {
    if (!detail::is_hex_digest(asset_hash))
        throw std::invalid_argument("make_misleading_claim: asset_hash must be 64 hex characters");
    Claim c;
    c.action = kMisleadingAction;
    c.software_agent = kMisleadingAgent;
    c.signed_at = signed_at;
    c.asset_hash = asset_hash;
    return c;
}

inline nlohmann::json claim_to_json(const Claim& c) {
    nlohmann::json j;
    j["action"] = c.action;
    j["assetHash"] = c.asset_hash;
    if (c.digital_source_type) j["digitalSourceType"] = *c.digital_source_type;
    j["signedAt"] = c.signed_at;
    j["softwareAgent"] = c.software_agent;
    return j;
}

// Strict parse: exactly the known keys, all strings. Anything else is treated
// as tampering by the caller.
inline Claim claim_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("claim: not an object");
    Claim c;
    std::size_t known = 0;
    auto get = [&](const char* key, std::string& out) {
        const auto it = j.find(key);
        if (it == j.end() || !it->is_string())
            throw std::invalid_argument(std::string("claim: missing string field ") + key);
        out = it->get<std::string>();
        ++known;
    };
    get("action", c.action);
    get("assetHash", c.asset_hash);
    get("signedAt", c.signed_at);
    get("softwareAgent", c.software_agent);
    if (const auto it = j.find("digitalSourceType"); it != j.end()) {
        if (!it->is_string())
            throw std::invalid_argument("claim: digitalSourceType must be a string");
        c.digital_source_type = it->get<std::string>();
        ++known;
    }
    if (j.size() != known) throw std::invalid_argument("claim: unexpected fields");
    return c;
}

// Signing input: UTF-8 JSON, keys sorted lexicographically, no insignificant
// whitespace, absent optional fields omitted.
inline std::vector<std::uint8_t> canonicalize(const Claim& c) {
    const std::string s = claim_to_json(c).dump();
    return std::vector<std::uint8_t>(s.begin(), s.end());
}

// Leaf + root DER certificates; the leaf private key is present only on the
// signer's copy.
struct CertChain {
    std::vector<std::uint8_t> leaf_der;
    std::vector<std::uint8_t> root_der;
    std::shared_ptr<EVP_PKEY> leaf_private_key;  // may be null (verify-only)
};

struct SignedManifest {
    Claim claim;
    std::vector<std::uint8_t> signature;             // DER ECDSA
    std::vector<std::vector<std::uint8_t>> certs;    // [leaf, root] DER
};

class TrustStore {
public:
    TrustStore() = default;
    explicit TrustStore(std::vector<std::vector<std::uint8_t>> roots) {
        for (auto& r : roots) roots_.insert(std::move(r));
    }

    bool contains(const std::vector<std::uint8_t>& root_der) const {
        return roots_.count(root_der) != 0;
    }
    std::size_t size() const { return roots_.size(); }

    // Stores are immutable; extending one means building a new store.
    TrustStore with_root(std::vector<std::uint8_t> root_der) const {
        TrustStore next = *this;
        next.roots_.insert(std::move(root_der));
        return next;
    }

private:
    std::set<std::vector<std::uint8_t>> roots_;
};

namespace detail {

inline EvpPkeyPtr generate_p256_key() {
    EVP_PKEY* key = EVP_PKEY_Q_keygen(nullptr, nullptr, "EC", "P-256");
    if (!key) throw_openssl("EC keygen");
    return EvpPkeyPtr(key);
}

inline X509Ptr make_cert(const std::string& subject_cn, EVP_PKEY* subject_key,
                         const std::string& issuer_cn, EVP_PKEY* issuer_key, long serial) {
    X509Ptr cert(X509_new());
    if (!cert) throw_openssl("X509_new");
    X509_set_version(cert.get(), 2);
    ASN1_INTEGER_set(X509_get_serialNumber(cert.get()), serial);
    X509_gmtime_adj(X509_getm_notBefore(cert.get()), 0);
    X509_gmtime_adj(X509_getm_notAfter(cert.get()), 60L * 60 * 24 * 365);
    X509_set_pubkey(cert.get(), subject_key);

    X509_NAME* name = X509_get_subject_name(cert.get());
    X509_NAME_add_entry_by_txt(name, "CN", MBSTRING_ASC,
                               reinterpret_cast<const unsigned char*>(subject_cn.c_str()), -1, -1,
                               0);
    X509_NAME* iname = X509_get_issuer_name(cert.get());
    X509_NAME_add_entry_by_txt(iname, "CN", MBSTRING_ASC,
                               reinterpret_cast<const unsigned char*>(issuer_cn.c_str()), -1, -1,
                               0);
    if (X509_sign(cert.get(), issuer_key, EVP_sha256()) == 0) throw_openssl("X509_sign");
    return cert;
}

}  // namespace detail

// Fresh self-signed root plus a leaf signed by it, both P-256/SHA-256 with
// one-year validity.
inline CertChain generate_cert_chain(const std::string& subject) {
    if (subject.empty())
        throw std::invalid_argument("generate_cert_chain: subject must be non-empty");
    auto root_key = detail::generate_p256_key();
    auto leaf_key = detail::generate_p256_key();

    const std::string root_cn = subject + " Root CA";
    auto root = detail::make_cert(root_cn, root_key.get(), root_cn, root_key.get(), 1);
    auto leaf = detail::make_cert(subject, leaf_key.get(), root_cn, root_key.get(), 2);

    CertChain chain;
    chain.leaf_der = detail::x509_to_der(leaf.get());
    chain.root_der = detail::x509_to_der(root.get());
    chain.leaf_private_key =
        std::shared_ptr<EVP_PKEY>(leaf_key.release(), detail::EvpPkeyDeleter());
    return chain;
}

inline SignedManifest sign(const Claim& claim, const CertChain& chain) {
    if (!chain.leaf_private_key)
        throw CryptoError("sign: chain does not hold the leaf private key");
    const auto bytes = canonicalize(claim);

    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) detail::throw_openssl("EVP_MD_CTX_new");
    std::vector<std::uint8_t> sig;
    size_t sig_len = 0;
    bool ok = EVP_DigestSignInit(ctx, nullptr, EVP_sha256(), nullptr,
                                 chain.leaf_private_key.get()) == 1 &&
              EVP_DigestSign(ctx, nullptr, &sig_len, bytes.data(), bytes.size()) == 1;
    if (ok) {
        sig.resize(sig_len);
        ok = EVP_DigestSign(ctx, sig.data(), &sig_len, bytes.data(), bytes.size()) == 1;
        sig.resize(sig_len);
    }
    EVP_MD_CTX_free(ctx);
    if (!ok) detail::throw_openssl("EVP_DigestSign");

    SignedManifest m;
    m.claim = claim;
    m.signature = std::move(sig);
    m.certs = {chain.leaf_der, chain.root_der};
    return m;
}

namespace detail {

inline bool verify_signature(const std::vector<std::uint8_t>& msg,
                             const std::vector<std::uint8_t>& sig, EVP_PKEY* pub) {
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) return false;
    const bool ok = EVP_DigestVerifyInit(ctx, nullptr, EVP_sha256(), nullptr, pub) == 1 &&
                    EVP_DigestVerify(ctx, sig.data(), sig.size(), msg.data(), msg.size()) == 1;
    EVP_MD_CTX_free(ctx);
    return ok;
}

}  // namespace detail

// Signature, chain, and hard-binding checks. All failures collapse to
// `invalid`; trust-store membership of the root decides trusted vs untrusted.
// The claim is returned either way for downstream semantic inspection.
inline std::pair<ManifestStatus, Claim> verify(const SignedManifest& manifest,
                                               const std::string& expected_asset_hash,
                                               const TrustStore& trust_store) {
    if (manifest.certs.size() != 2) return {ManifestStatus::invalid, manifest.claim};
    try {
        auto leaf = detail::der_to_x509(manifest.certs[0]);
        auto root = detail::der_to_x509(manifest.certs[1]);
        EVP_PKEY* root_pub = X509_get0_pubkey(root.get());
        EVP_PKEY* leaf_pub = X509_get0_pubkey(leaf.get());
        if (!root_pub || !leaf_pub) return {ManifestStatus::invalid, manifest.claim};
        if (X509_verify(root.get(), root_pub) != 1) return {ManifestStatus::invalid, manifest.claim};
        if (X509_verify(leaf.get(), root_pub) != 1) return {ManifestStatus::invalid, manifest.claim};
        if (!detail::verify_signature(canonicalize(manifest.claim), manifest.signature, leaf_pub))
            return {ManifestStatus::invalid, manifest.claim};
        if (manifest.claim.asset_hash != expected_asset_hash)
            return {ManifestStatus::invalid, manifest.claim};
        const auto status = trust_store.contains(manifest.certs[1])
                                ? ManifestStatus::valid_trusted
                                : ManifestStatus::valid_untrusted;
        return {status, manifest.claim};
    } catch (const CryptoError&) {
        return {ManifestStatus::invalid, manifest.claim};
    }
}

// Envelope wire form: {"claim": {...}, "signature": b64, "certs": [b64, b64]}.
inline std::vector<std::uint8_t> to_envelope(const SignedManifest& m) {
    nlohmann::json j;
    j["claim"] = claim_to_json(m.claim);
    j["signature"] = detail::base64_encode(m.signature);
    nlohmann::json certs = nlohmann::json::array();
    for (const auto& c : m.certs) certs.push_back(detail::base64_encode(c));
    j["certs"] = certs;
    const std::string s = j.dump();
    return std::vector<std::uint8_t>(s.begin(), s.end());
}

inline SignedManifest parse_envelope(const std::vector<std::uint8_t>& bytes) {
    nlohmann::json j = nlohmann::json::parse(bytes.begin(), bytes.end());  // throws on bad JSON
    if (!j.is_object() || !j.contains("claim") || !j.contains("signature") ||
        !j.contains("certs") || !j["certs"].is_array())
        throw std::invalid_argument("envelope: missing fields");
    SignedManifest m;
    m.claim = claim_from_json(j["claim"]);
    m.signature = detail::base64_decode(j["signature"].get<std::string>());
    for (const auto& c : j["certs"]) m.certs.push_back(detail::base64_decode(c.get<std::string>()));
    return m;
}

// Envelope-level verify: malformed bytes are simply an invalid manifest.
inline std::pair<ManifestStatus, std::optional<Claim>> verify_envelope(
    const std::vector<std::uint8_t>& envelope, const std::string& expected_asset_hash,
    const TrustStore& trust_store) {
    SignedManifest m;
    try {
        m = parse_envelope(envelope);
    } catch (const std::exception&) {
        return {ManifestStatus::invalid, std::nullopt};
    }
    auto [status, claim] = verify(m, expected_asset_hash, trust_store);
    return {status, std::move(claim)};
}

// ---- PEM material on disk ----------------------------------------------

// Signing bundle: leaf cert, root cert, then the leaf private key.
inline std::string chain_to_pem(const CertChain& chain) {
    detail::BioPtr bio(BIO_new(BIO_s_mem()));
    if (!bio) detail::throw_openssl("BIO_new");
    auto leaf = detail::der_to_x509(chain.leaf_der);
    auto root = detail::der_to_x509(chain.root_der);
    if (PEM_write_bio_X509(bio.get(), leaf.get()) != 1 ||
        PEM_write_bio_X509(bio.get(), root.get()) != 1)
        detail::throw_openssl("PEM_write_bio_X509");
    if (chain.leaf_private_key) {
        if (PEM_write_bio_PrivateKey(bio.get(), chain.leaf_private_key.get(), nullptr, nullptr, 0,
                                     nullptr, nullptr) != 1)
            detail::throw_openssl("PEM_write_bio_PrivateKey");
    }
    char* data = nullptr;
    const long len = BIO_get_mem_data(bio.get(), &data);
    return std::string(data, data + len);
}

inline CertChain chain_from_pem(const std::string& pem) {
    detail::BioPtr bio(BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())));
    if (!bio) detail::throw_openssl("BIO_new_mem_buf");
    detail::X509Ptr leaf(PEM_read_bio_X509(bio.get(), nullptr, nullptr, nullptr));
    detail::X509Ptr root(PEM_read_bio_X509(bio.get(), nullptr, nullptr, nullptr));
    if (!leaf || !root) throw CryptoError("chain_from_pem: expected leaf and root certificates");
    CertChain chain;
    chain.leaf_der = detail::x509_to_der(leaf.get());
    chain.root_der = detail::x509_to_der(root.get());
    EVP_PKEY* key = PEM_read_bio_PrivateKey(bio.get(), nullptr, nullptr, nullptr);
    if (key) chain.leaf_private_key = std::shared_ptr<EVP_PKEY>(key, detail::EvpPkeyDeleter());
    return chain;
}

inline std::string root_to_pem(const std::vector<std::uint8_t>& root_der) {
    detail::BioPtr bio(BIO_new(BIO_s_mem()));
    auto root = detail::der_to_x509(root_der);
    if (PEM_write_bio_X509(bio.get(), root.get()) != 1)
        detail::throw_openssl("PEM_write_bio_X509");
    char* data = nullptr;
    const long len = BIO_get_mem_data(bio.get(), &data);
    return std::string(data, data + len);
}

// All CERTIFICATE blocks in the text become trust-store roots.
inline TrustStore trust_store_from_pem(const std::string& pem) {
    detail::BioPtr bio(BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())));
    std::vector<std::vector<std::uint8_t>> roots;
    while (true) {
        detail::X509Ptr cert(PEM_read_bio_X509(bio.get(), nullptr, nullptr, nullptr));
        if (!cert) break;
        roots.push_back(detail::x509_to_der(cert.get()));
    }
    ERR_clear_error();  // benign end-of-stream error from the last read
    if (roots.empty()) throw CryptoError("trust_store_from_pem: no certificates found");
    return TrustStore(std::move(roots));
}

}  // namespace xprov
