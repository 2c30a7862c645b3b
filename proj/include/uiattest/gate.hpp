#pragma once

#include "uiattest/engine.hpp"

#include <array>
#include <filesystem>
#include <span>
#include <string>

namespace uiattest {

// Ed25519 keypair, raw 32-byte seed form. The seed is wiped on destruction.
struct KeyPair {
    std::array<std::uint8_t, 32> seed{};
    std::array<std::uint8_t, 32> pub{};

    KeyPair() = default;
    KeyPair(const KeyPair&) = default;
    KeyPair& operator=(const KeyPair&) = default;
    ~KeyPair();

    static KeyPair generate();
    static KeyPair from_seed(std::span<const std::uint8_t> seed32);
};

// Deterministic request form: pairs sorted by label then value, one
// "label=value" per line, LF after each. Empty request serializes to "".
std::string canonical_serialize(const std::vector<std::pair<std::string, std::string>>& pairs);

// What actually gets signed: SHA-256 of the canonical bytes.
Digest signing_digest(const std::string& canonical);

struct MatchResult {
    bool ok = false;
    std::string detail;
};

// The request may only carry what the session extracted: same label set,
// byte-equal values.
MatchResult match_request(const Request& req, const InputHistory& history);

struct GateDecision {
    bool signed_ok = false;
    std::string reason; // refusal reason when !signed_ok
    std::array<std::uint8_t, 64> signature{};
    std::string canonical;
};

// Signs only when the verdict is intended and the request matches the
// extracted inputs. Never signs otherwise.
GateDecision sign_request(const Request& req, const SessionVerdict& verdict, const KeyPair& key);

bool verify_signature(const std::string& canonical, std::span<const std::uint8_t> pub,
                      std::span<const std::uint8_t> sig);

// Key files: one lowercase hex line, LF-terminated.
void save_key_file(const std::filesystem::path& p, std::span<const std::uint8_t> key);
std::array<std::uint8_t, 32> load_key_file(const std::filesystem::path& p);

// Signature artifact: hex signature section, then the canonical request.
std::string serialize_signed_request(const GateDecision& d);
struct SignedRequestFile {
    std::array<std::uint8_t, 64> signature{};
    std::string canonical;
};
SignedRequestFile parse_signed_request(const std::string& bytes);

} // namespace uiattest
