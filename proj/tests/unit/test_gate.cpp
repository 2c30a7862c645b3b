#include "doctest.h"

#include "uiattest/errors.hpp"
#include "uiattest/gate.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace uiattest;

namespace {

std::array<std::uint8_t, 32> seq_seed(std::uint8_t base = 1) {
    std::array<std::uint8_t, 32> s{};
    for (size_t i = 0; i < s.size(); ++i)
        s[i] = static_cast<std::uint8_t>(base + i);
    return s;
}

SessionVerdict verdict_with(std::initializer_list<std::pair<const char*, FieldState>> fields,
                            bool intended = true) {
    SessionVerdict v;
    v.intended = intended;
    for (const auto& [id, f] : fields)
        v.inputs.fields[id] = f;
    return v;
}

std::filesystem::path tmp_file(const char* name) {
    auto dir = std::filesystem::temp_directory_path() / "uiattest_gate_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_CASE("canonical form sorts by label then value") {
    CHECK(canonical_serialize({}) == "");
    CHECK(canonical_serialize({{"Amount", "42"}}) == "Amount=42\n");
    std::vector<std::pair<std::string, std::string>> pairs = {
        {"b", "2"}, {"a", "1"}, {"a", "0"}};
    CHECK(canonical_serialize(pairs) == "a=0\na=1\nb=2\n");
    // input order never leaks through
    std::vector<std::pair<std::string, std::string>> shuffled = {
        {"a", "0"}, {"b", "2"}, {"a", "1"}};
    CHECK(canonical_serialize(shuffled) == canonical_serialize(pairs));
}

TEST_CASE("signing digest is the hash of the canonical bytes") {
    CHECK(to_hex(signing_digest("")) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(to_hex(signing_digest("a=1\n")) == to_hex(sha256("a=1\n")));
}

TEST_CASE("keypairs derive deterministically from a seed") {
    auto seed = seq_seed();
    KeyPair a = KeyPair::from_seed(seed);
    KeyPair b = KeyPair::from_seed(seed);
    CHECK(a.pub == b.pub);
    CHECK(a.seed == seed);

    KeyPair c = KeyPair::generate();
    KeyPair d = KeyPair::generate();
    CHECK(c.pub != d.pub);

    std::vector<std::uint8_t> short_seed(16, 0);
    CHECK_THROWS_AS(KeyPair::from_seed(short_seed), std::invalid_argument);
}

TEST_CASE("public key matches the reference derivation") {
    // seed/pub pair from the standard ed25519 test vectors
    auto seed_bytes = from_hex("9d61b19deffd5a60ba844af492ec2cc44449c5697b326919703bac031cae7f60");
    KeyPair kp = KeyPair::from_seed(seed_bytes);
    CHECK(to_hex(kp.pub) == "d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a");
}

TEST_CASE("request matching is exact on labels and values") {
    InputHistory hist;
    hist.fields["amount"] = FieldState{"Amount", "12", std::nullopt};
    hist.fields["to"] = FieldState{"To", "ACME", std::nullopt};

    SUBCASE("match") {
        Request req;
        req.pairs = {{"To", "ACME"}, {"Amount", "12"}};
        MatchResult m = match_request(req, hist);
        CHECK(m.ok);
        CHECK(m.detail.empty());
    }
    SUBCASE("label never extracted") {
        Request req;
        req.pairs = {{"Amount", "12"}, {"To", "ACME"}, {"Memo", "hi"}};
        MatchResult m = match_request(req, hist);
        CHECK(!m.ok);
        CHECK(m.detail == "request label \"Memo\" was never extracted");
    }
    SUBCASE("value mismatch") {
        Request req;
        req.pairs = {{"Amount", "13"}, {"To", "ACME"}};
        MatchResult m = match_request(req, hist);
        CHECK(!m.ok);
        CHECK(m.detail == "value mismatch for \"Amount\": extracted \"12\", request says \"13\"");
    }
    SUBCASE("extracted input left out of the request") {
        Request req;
        req.pairs = {{"Amount", "12"}};
        MatchResult m = match_request(req, hist);
        CHECK(!m.ok);
        CHECK(m.detail == "extracted input \"To\" is missing from the request");
    }
    SUBCASE("duplicate labels compare as multisets") {
        InputHistory dup;
        dup.fields["f1"] = FieldState{"Amount", "1", std::nullopt};
        dup.fields["f2"] = FieldState{"Amount", "2", std::nullopt};
        Request req;
        req.pairs = {{"Amount", "2"}, {"Amount", "1"}};
        CHECK(match_request(req, dup).ok);
        req.pairs = {{"Amount", "1"}, {"Amount", "1"}};
        CHECK(!match_request(req, dup).ok);
    }
}

TEST_CASE("signatures emit only for matching intended sessions") {
    KeyPair key = KeyPair::from_seed(seq_seed(7));
    SessionVerdict ok = verdict_with({{"amount", {"Amount", "12", std::nullopt}}});
    Request req;
    req.pairs = {{"Amount", "12"}};

    SUBCASE("signed and verifiable") {
        GateDecision d = sign_request(req, ok, key);
        REQUIRE(d.signed_ok);
        CHECK(d.reason.empty());
        CHECK(d.canonical == "Amount=12\n");
        CHECK(verify_signature(d.canonical, key.pub, d.signature));
    }
    SUBCASE("tampered canonical fails verification") {
        GateDecision d = sign_request(req, ok, key);
        REQUIRE(d.signed_ok);
        CHECK(!verify_signature("Amount=13\n", key.pub, d.signature));
    }
    SUBCASE("tampered signature fails verification") {
        GateDecision d = sign_request(req, ok, key);
        REQUIRE(d.signed_ok);
        auto sig = d.signature;
        sig[10] ^= 0x01;
        CHECK(!verify_signature(d.canonical, key.pub, sig));
    }
    SUBCASE("wrong key fails verification") {
        GateDecision d = sign_request(req, ok, key);
        KeyPair other = KeyPair::from_seed(seq_seed(9));
        CHECK(!verify_signature(d.canonical, other.pub, d.signature));
    }
    SUBCASE("rejected verdict refuses") {
        SessionVerdict bad = verdict_with({{"amount", {"Amount", "12", std::nullopt}}}, false);
        GateDecision d = sign_request(req, bad, key);
        CHECK(!d.signed_ok);
        CHECK(d.reason == "session verdict is rejected");
        std::array<std::uint8_t, 64> zeros{};
        CHECK(d.signature == zeros);
    }
    SUBCASE("mismatched request refuses with the match detail") {
        Request wrong;
        wrong.pairs = {{"Amount", "99"}};
        GateDecision d = sign_request(wrong, ok, key);
        CHECK(!d.signed_ok);
        CHECK(d.reason == "value mismatch for \"Amount\": extracted \"12\", request says \"99\"");
    }
    SUBCASE("bad sizes never verify") {
        GateDecision d = sign_request(req, ok, key);
        std::vector<std::uint8_t> short_pub(16, 0);
        CHECK(!verify_signature(d.canonical, short_pub, d.signature));
        std::vector<std::uint8_t> short_sig(32, 0);
        CHECK(!verify_signature(d.canonical, key.pub, short_sig));
    }
}

TEST_CASE("key files hold one hex line") {
    auto p = tmp_file("key.hex");
    KeyPair kp = KeyPair::from_seed(seq_seed(3));
    save_key_file(p, kp.seed);

    std::ifstream in(p, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(content == to_hex(kp.seed) + "\n");

    auto loaded = load_key_file(p);
    CHECK(loaded == kp.seed);

    SUBCASE("wrong length rejected") {
        std::ofstream out(p, std::ios::binary);
        out << "abcd\n";
        out.close();
        CHECK_THROWS_AS(load_key_file(p), ParseError);
    }
    SUBCASE("junk rejected") {
        std::ofstream out(p, std::ios::binary);
        out << std::string(64, 'z') << "\n";
        out.close();
        CHECK_THROWS(load_key_file(p));
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_key_file(tmp_file("nope.hex")), IoError);
    }
}

TEST_CASE("signed request artifact round trips") {
    GateDecision d;
    d.signed_ok = true;
    for (size_t i = 0; i < d.signature.size(); ++i)
        d.signature[i] = static_cast<std::uint8_t>(i);
    d.canonical = "Amount=12\nTo=ACME\n";

    std::string bytes = serialize_signed_request(d);
    CHECK(bytes.find("-----SIGNATURE-----\n") == 0);
    CHECK(bytes.find("-----REQUEST-----\n") != std::string::npos);

    SignedRequestFile f = parse_signed_request(bytes);
    CHECK(f.signature == d.signature);
    CHECK(f.canonical == d.canonical);

    CHECK_THROWS_AS(parse_signed_request("garbage"), ParseError);
    CHECK_THROWS_AS(parse_signed_request("-----SIGNATURE-----\nzz\n-----REQUEST-----\n"),
                    ParseError);
    CHECK_THROWS_AS(parse_signed_request("-----SIGNATURE-----\nab\n-----REQUEST-----\n"),
                    ParseError);
}
