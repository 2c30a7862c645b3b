#include "uiattest/gate.hpp"

#include "uiattest/errors.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

namespace uiattest {

namespace {

using PkeyPtr = std::unique_ptr<EVP_PKEY, decltype(&EVP_PKEY_free)>;
using CtxPtr = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;

[[noreturn]] void crypto_fail(const char* what) {
    throw std::runtime_error(std::string("ed25519: ") + what + " failed");
}

PkeyPtr pkey_from_seed(std::span<const std::uint8_t> seed) {
    EVP_PKEY* k = EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed.data(), seed.size());
    if (!k)
        crypto_fail("load private key");
    return PkeyPtr(k, EVP_PKEY_free);
}

constexpr const char* kSigHeader = "-----SIGNATURE-----";
constexpr const char* kReqHeader = "-----REQUEST-----";

} // namespace

KeyPair::~KeyPair() {
    OPENSSL_cleanse(seed.data(), seed.size());
}

KeyPair KeyPair::generate() {
    std::unique_ptr<EVP_PKEY_CTX, decltype(&EVP_PKEY_CTX_free)> ctx(
        EVP_PKEY_CTX_new_id(EVP_PKEY_ED25519, nullptr), EVP_PKEY_CTX_free);
    if (!ctx || EVP_PKEY_keygen_init(ctx.get()) <= 0)
        crypto_fail("keygen init");
    EVP_PKEY* raw = nullptr;
    if (EVP_PKEY_keygen(ctx.get(), &raw) <= 0)
        crypto_fail("keygen");
    PkeyPtr key(raw, EVP_PKEY_free);
    KeyPair kp;
    size_t n = kp.seed.size();
    if (EVP_PKEY_get_raw_private_key(key.get(), kp.seed.data(), &n) <= 0 || n != kp.seed.size())
        crypto_fail("export private key");
    n = kp.pub.size();
    if (EVP_PKEY_get_raw_public_key(key.get(), kp.pub.data(), &n) <= 0 || n != kp.pub.size())
        crypto_fail("export public key");
    return kp;
}

KeyPair KeyPair::from_seed(std::span<const std::uint8_t> seed32) {
    if (seed32.size() != 32)
        throw std::invalid_argument("ed25519 seed must be 32 bytes");
    PkeyPtr key = pkey_from_seed(seed32);
    KeyPair kp;
    std::copy(seed32.begin(), seed32.end(), kp.seed.begin());
    size_t n = kp.pub.size();
    if (EVP_PKEY_get_raw_public_key(key.get(), kp.pub.data(), &n) <= 0 || n != kp.pub.size())
        crypto_fail("export public key");
    return kp;
}

std::string canonical_serialize(const std::vector<std::pair<std::string, std::string>>& pairs) {
    auto sorted = pairs;
    std::sort(sorted.begin(), sorted.end());
    std::string out;
    for (const auto& [label, value] : sorted) {
        out += label;
        out += '=';
        out += value;
        out += '\n';
    }
    return out;
}

Digest signing_digest(const std::string& canonical) {
    return sha256(canonical);
}

MatchResult match_request(const Request& req, const InputHistory& history) {
    std::map<std::string, std::vector<std::string>> want, have;
    for (const auto& [label, value] : req.pairs)
        want[label].push_back(value);
    for (const auto& [id, f] : history.fields)
        have[f.label].push_back(f.value);
    for (auto& [k, vs] : want)
        std::sort(vs.begin(), vs.end());
    for (auto& [k, vs] : have)
        std::sort(vs.begin(), vs.end());

    for (const auto& [label, vs] : want) {
        auto it = have.find(label);
        if (it == have.end())
            return {false, "request label \"" + label + "\" was never extracted"};
        if (it->second != vs) {
            std::string got = it->second.empty() ? "" : it->second.front();
            std::string asked = vs.empty() ? "" : vs.front();
            return {false, "value mismatch for \"" + label + "\": extracted \"" + got +
                               "\", request says \"" + asked + "\""};
        }
    }
    for (const auto& [label, vs] : have)
        if (!want.count(label))
            return {false, "extracted input \"" + label + "\" is missing from the request"};
    return {true, {}};
}

GateDecision sign_request(const Request& req, const SessionVerdict& verdict, const KeyPair& key) {
    GateDecision d;
    d.canonical = canonical_serialize(req.pairs);
    if (!verdict.intended) {
        d.reason = "session verdict is rejected";
        return d;
    }
    MatchResult m = match_request(req, verdict.inputs);
    if (!m.ok) {
        d.reason = m.detail;
        return d;
    }
    Digest msg = signing_digest(d.canonical);
    PkeyPtr pkey = pkey_from_seed(key.seed);
    CtxPtr ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, pkey.get()) <= 0)
        crypto_fail("sign init");
    size_t n = d.signature.size();
    if (EVP_DigestSign(ctx.get(), d.signature.data(), &n, msg.data(), msg.size()) <= 0 ||
        n != d.signature.size())
        crypto_fail("sign");
    d.signed_ok = true;
    return d;
}

bool verify_signature(const std::string& canonical, std::span<const std::uint8_t> pub,
                      std::span<const std::uint8_t> sig) {
    if (pub.size() != 32 || sig.size() != 64)
        return false;
    EVP_PKEY* raw = EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, pub.data(), pub.size());
    if (!raw)
        return false;
    PkeyPtr key(raw, EVP_PKEY_free);
    CtxPtr ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) <= 0)
        return false;
    Digest msg = signing_digest(canonical);
    return EVP_DigestVerify(ctx.get(), sig.data(), sig.size(), msg.data(), msg.size()) == 1;
}

void save_key_file(const std::filesystem::path& p, std::span<const std::uint8_t> key) {
    std::ofstream out(p, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + p.string());
    out << to_hex(key) << "\n";
    if (!out)
        throw IoError("write failed for " + p.string());
}

std::array<std::uint8_t, 32> load_key_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw IoError("cannot read " + p.string());
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    auto bytes = from_hex(line);
    if (bytes.size() != 32)
        throw ParseError("key file " + p.string() + " must hold exactly 32 hex-encoded bytes");
    std::array<std::uint8_t, 32> out{};
    std::copy(bytes.begin(), bytes.end(), out.begin());
    return out;
}

std::string serialize_signed_request(const GateDecision& d) {
    std::ostringstream os;
    os << kSigHeader << "\n" << to_hex(d.signature) << "\n" << kReqHeader << "\n" << d.canonical;
    return os.str();
}

SignedRequestFile parse_signed_request(const std::string& bytes) {
    std::istringstream in(bytes);
    std::string line;
    if (!std::getline(in, line) || line != kSigHeader)
        throw ParseError("signed request: missing signature header");
    if (!std::getline(in, line))
        throw ParseError("signed request: missing signature");
    auto sig = from_hex(line);
    if (sig.size() != 64)
        throw ParseError("signed request: signature must be 64 bytes");
    if (!std::getline(in, line) || line != kReqHeader)
        throw ParseError("signed request: missing request header");
    SignedRequestFile f;
    std::copy(sig.begin(), sig.end(), f.signature.begin());
    std::ostringstream rest;
    rest << in.rdbuf();
    f.canonical = rest.str();
    return f;
}

} // namespace uiattest
