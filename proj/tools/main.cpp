#include "uiattest/engine.hpp"
#include "uiattest/errors.hpp"
#include "uiattest/fixtures.hpp"
#include "uiattest/gate.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace uiattest;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw IoError("cannot read " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const fs::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + p.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::array<std::uint8_t, 32> parse_hex32(const std::string& hex) {
    if (hex.size() != 64)
        throw std::invalid_argument("expected 64 hex chars");
    std::array<std::uint8_t, 32> out{};
    auto nib = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw std::invalid_argument("bad hex digit");
    };
    for (size_t i = 0; i < 32; ++i)
        out[i] = static_cast<std::uint8_t>(nib(hex[2 * i]) << 4 | nib(hex[2 * i + 1]));
    return out;
}

struct VerifyFlags {
    std::string manifest, request, key, out, sig_out, corpus;
    std::uint64_t seed = 1;
    bool no_cache = false, full_revalidate = false;
    double hsv_threshold = 15.0;
    std::string ocr_engine = "reference";
    int jobs = 1;
};

EngineOptions engine_options(const VerifyFlags& fl) {
    EngineOptions opts;
    opts.sampler.seed = fl.seed;
    opts.validator = opts.validator.with_hsv_percent(fl.hsv_threshold);
    opts.use_cache = !fl.no_cache;
    opts.full_revalidate = fl.full_revalidate;
    opts.jobs = fl.jobs;
    opts.ocr_engine = fl.ocr_engine;
    return opts;
}

// One session end to end. Returns 0 signed, 2 rejected/refused.
int verify_one(const fs::path& manifest_path, const fs::path& request_path, const KeyPair& key,
               const EngineOptions& opts, const fs::path& out_path, const fs::path& sig_path,
               const std::string& tag) {
    json doc;
    GateDecision gate;
    auto artifact_refusal = [&](const std::exception& e) {
        json fail = {{"t_ms", 0},
                     {"region_id", ""},
                     {"rule", "artifact_error"},
                     {"detail", e.what()}};
        doc = {{"status", "rejected"}, {"failures", json::array({fail})}};
        gate.signed_ok = false;
        gate.reason = e.what();
    };
    try {
        SessionData data = load_session(manifest_path);
        Request req = parse_request(read_file(request_path));
        SessionVerdict verdict = run_session(data, opts);
        gate = sign_request(req, verdict, key);
        doc = verdict_to_json(verdict);
    } catch (const ParseError& e) {
        artifact_refusal(e);
    } catch (const IoError& e) {
        artifact_refusal(e);
    }
    doc["signed"] = gate.signed_ok;
    if (!gate.signed_ok)
        doc["refusal_reason"] = gate.reason;

    if (!out_path.empty())
        write_file(out_path, doc.dump(2) + "\n");
    if (gate.signed_ok && !sig_path.empty())
        write_file(sig_path, serialize_signed_request(gate));

    std::string status = doc.value("status", "rejected");
    std::string first_rule;
    if (doc.contains("failures") && !doc["failures"].empty())
        first_rule = doc["failures"][0].value("rule", "");
    std::cout << (tag.empty() ? "" : tag + ": ") << status;
    if (!first_rule.empty())
        std::cout << " (" << first_rule << ")";
    std::cout << (gate.signed_ok ? ", signed" : ", refused: " + gate.reason) << "\n";
    return gate.signed_ok ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"screen-session integrity verdicts and request signing"};
    app.require_subcommand(1);

    VerifyFlags fl;
    auto* verify = app.add_subcommand("verify", "replay a recorded session and sign its request");
    verify->add_option("--manifest", fl.manifest, "session manifest path");
    verify->add_option("--request", fl.request, "request file (label=value lines)");
    verify->add_option("--key", fl.key, "private key file")->required();
    verify->add_option("--out", fl.out, "verdict JSON path");
    verify->add_option("--sig-out", fl.sig_out, "signed request path (only written when signed)");
    verify->add_option("--corpus", fl.corpus, "directory of session directories");
    verify->add_option("--seed", fl.seed, "sampling seed");
    verify->add_flag("--no-cache", fl.no_cache, "disable frame/text/graphics caches");
    verify->add_flag("--full-revalidate", fl.full_revalidate, "ignore frame diffs");
    verify->add_option("--hsv-threshold", fl.hsv_threshold, "comparison threshold, percent");
    verify->add_option("--ocr-engine", fl.ocr_engine, "recognizer for text regions");
    verify->add_option("--jobs", fl.jobs, "parallel region validations");

    std::string kg_priv, kg_pub, kg_seed;
    auto* keygen = app.add_subcommand("keygen", "generate a signing keypair");
    keygen->add_option("--out-private", kg_priv, "private key path")->required();
    keygen->add_option("--out-public", kg_pub, "public key path")->required();
    keygen->add_option("--seed-hex", kg_seed, "derive from a 32-byte hex seed");

    std::string fx_scenario = "benign", fx_out, fx_format = "png";
    std::uint64_t fx_seed = 1;
    double fx_perturb = 0.0;
    int fx_count = 1;
    auto* fixtures = app.add_subcommand("fixtures", "synthesize session corpora");
    auto* gen = fixtures->add_subcommand("gen", "write one or more sessions");
    gen->add_option("--scenario", fx_scenario,
                    "benign|prefilled|min_tamper|context_hide|host_tamper_hidden|"
                    "host_tamper_ghost|host_tamper_nonpof|temporal");
    gen->add_option("--seed", fx_seed, "generation seed");
    gen->add_option("--out", fx_out, "output directory")->required();
    gen->add_option("--perturb", fx_perturb, "benign capture noise magnitude");
    gen->add_option("--format", fx_format, "png or raw frames")
        ->check(CLI::IsMember({"png", "raw"}));
    gen->add_option("--count", fx_count, "sessions to generate");

    std::string rp_out;
    std::vector<std::string> rp_dirs;
    auto* report = app.add_subcommand("report", "summarize verified corpora as CSV");
    report->add_option("--out", rp_out, "CSV path")->required();
    report->add_option("dirs", rp_dirs, "corpus directories")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (verify->parsed()) {
            KeyPair key = KeyPair::from_seed(load_key_file(fl.key));
            EngineOptions opts = engine_options(fl);
            if (!fl.corpus.empty()) {
                std::vector<fs::path> sessions;
                for (const auto& ent : fs::directory_iterator(fl.corpus))
                    if (ent.is_directory() && fs::exists(ent.path() / "manifest.json"))
                        sessions.push_back(ent.path());
                std::sort(sessions.begin(), sessions.end());
                if (sessions.empty())
                    throw IoError("no session directories under " + fl.corpus);
                int worst = 0;
                for (const auto& dir : sessions) {
                    int rc = verify_one(dir / "manifest.json", dir / "request.txt", key, opts,
                                        dir / "verdict.json", dir / "signed_request.txt",
                                        dir.filename().string());
                    worst = std::max(worst, rc);
                }
                return worst;
            }
            if (fl.manifest.empty() || fl.request.empty())
                throw std::invalid_argument("verify needs --manifest and --request (or --corpus)");
            fs::path sig = fl.sig_out.empty()
                               ? fs::path(fl.manifest).parent_path() / "signed_request.txt"
                               : fs::path(fl.sig_out);
            return verify_one(fl.manifest, fl.request, key, opts, fl.out, sig, "");
        }

        if (keygen->parsed()) {
            KeyPair kp = kg_seed.empty() ? KeyPair::generate()
                                         : KeyPair::from_seed(parse_hex32(kg_seed));
            save_key_file(kg_priv, kp.seed);
            save_key_file(kg_pub, kp.pub);
            std::cout << "wrote " << kg_priv << " and " << kg_pub << "\n";
            return 0;
        }

        if (gen->parsed()) {
            bool png = fx_format == "png";
            for (int i = 0; i < fx_count; ++i) {
                BuiltSession b = build_scenario(fx_scenario, fx_seed + static_cast<std::uint64_t>(i),
                                                fx_perturb);
                fs::path dir = fx_out;
                if (fx_count > 1) {
                    char name[32];
                    std::snprintf(name, sizeof name, "case_%03d", i);
                    dir /= name;
                }
                write_session_dir(b, dir, png);
                std::cout << dir.string() << ": " << b.scenario << ", " << b.frames.size()
                          << " frames, expect " << b.expect << "\n";
            }
            return 0;
        }

        if (report->parsed()) {
            std::ostringstream csv;
            csv << "corpus,sessions,frames,first_frame_ms,mean_subsequent_ms,cache_hit_rate,"
                   "tp,tn,fp,fn\n";
            for (const auto& dir : rp_dirs) {
                int sessions = 0, tp = 0, tn = 0, fp = 0, fn = 0;
                std::int64_t frames = 0;
                double first_sum = 0, subseq_sum = 0, hit_sum = 0;
                for (const auto& ent : fs::directory_iterator(dir)) {
                    fs::path vp = ent.path() / "verdict.json";
                    fs::path gp = ent.path() / "ground_truth.json";
                    if (!ent.is_directory() || !fs::exists(vp) || !fs::exists(gp))
                        continue;
                    json v = json::parse(read_file(vp));
                    json g = json::parse(read_file(gp));
                    ++sessions;
                    if (v.contains("perf")) {
                        const auto& p = v["perf"];
                        frames += static_cast<std::int64_t>(p["frames"].size());
                        first_sum += p.value("first_frame_ms", 0.0);
                        subseq_sum += p.value("mean_subsequent_ms", 0.0);
                        hit_sum += p.value("cache_hit_rate", 0.0);
                    }
                    bool predicted_reject = !v.value("signed", false);
                    bool actual_reject = g.value("expect", "intended") == "rejected";
                    if (actual_reject)
                        (predicted_reject ? tp : fn)++;
                    else
                        (predicted_reject ? fp : tn)++;
                }
                if (!sessions)
                    throw IoError("no verified sessions under " + dir);
                csv << fs::path(dir).filename().string() << "," << sessions << "," << frames << ","
                    << first_sum / sessions << "," << subseq_sum / sessions << ","
                    << hit_sum / sessions << "," << tp << "," << tn << "," << fp << "," << fn
                    << "\n";
            }
            write_file(rp_out, csv.str());
            std::cout << "wrote " << rp_out << "\n";
            return 0;
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2; // damaged session artifacts refuse, they do not crash
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
