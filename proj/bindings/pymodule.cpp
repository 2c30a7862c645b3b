#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "uiattest/engine.hpp"
#include "uiattest/errors.hpp"
#include "uiattest/fixtures.hpp"
#include "uiattest/gate.hpp"
#include "uiattest/ocr.hpp"

#include <fstream>
#include <optional>
#include <utility>

namespace py = pybind11;
using namespace uiattest;

namespace {

Frame frame_from_bytes(int w, int h, const py::bytes& rgb) {
    std::string buf = rgb;
    if (buf.size() != static_cast<size_t>(w) * h * 3)
        throw std::invalid_argument("buffer is not w*h*3 bytes");
    return Frame(w, h, std::vector<std::uint8_t>(buf.begin(), buf.end()));
}

EngineOptions options_from_kwargs(std::uint64_t seed, bool use_cache, bool full_revalidate,
                                  const std::string& ocr_engine, int jobs) {
    EngineOptions opts;
    opts.sampler.seed = seed;
    opts.use_cache = use_cache;
    opts.full_revalidate = full_revalidate;
    opts.ocr_engine = ocr_engine;
    opts.jobs = jobs;
    return opts;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "screen-session integrity verdicts: rendering checks, input "
              "extraction at the focus indicators, and request signing";
    m.attr("__version__") = "0.1.0";

    py::register_exception<ParseError>(m, "ParseError");
    py::register_exception<IoError>(m, "IoError");

    m.def("rgb_to_hsv", [](int r, int g, int b) {
        auto p = rgb_to_hsv(static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                            static_cast<std::uint8_t>(b));
        return py::make_tuple(p.h, p.s, p.v);
    });
    m.def("hsv_to_rgb", [](double h, double s, double v) {
        std::uint8_t r, g, b;
        hsv_to_rgb(h, s, v, r, g, b);
        return py::make_tuple(static_cast<int>(r), static_cast<int>(g), static_cast<int>(b));
    });
    m.def("hue_distance", &hue_distance);
    m.def("sha256_hex", [](const py::bytes& b) {
        std::string s = b;
        return to_hex(sha256(s));
    });
    m.def("normalize_text", &normalize_text);

    m.def(
        "recognize_text",
        [](int w, int h, const py::bytes& rgb) {
            OcrResult r = recognize_text(frame_from_bytes(w, h, rgb));
            py::list boxes;
            for (const auto& bx : r.char_boxes)
                boxes.append(py::make_tuple(bx.x, bx.y, bx.w, bx.h));
            return py::make_tuple(r.text, r.confidence, boxes);
        },
        py::arg("width"), py::arg("height"), py::arg("rgb"),
        "Read the glyph grid out of an RGB raster: (text, confidence, boxes).");

    m.def(
        "sample_schedule",
        [](std::int64_t start, std::int64_t end, double mean, double std, double limit,
           std::uint64_t seed) {
            SamplerConfig cfg;
            cfg.mean_ms = mean;
            cfg.std_ms = std;
            cfg.exposure_limit_ms = limit;
            cfg.seed = seed;
            return sample_schedule(cfg, start, end);
        },
        py::arg("start_t"), py::arg("end_t"), py::arg("mean_ms") = 250.0,
        py::arg("std_ms") = 83.0, py::arg("exposure_limit_ms") = 500.0, py::arg("seed") = 1);

    m.def(
        "classify_edit",
        [](const std::string& old_value, const std::string& new_value, const std::string& region,
           std::optional<int> caret, std::optional<std::pair<int, int>> last_selection) {
            PofState pof;
            pof.focus = region;
            if (caret)
                pof.caret = CaretMark{region, *caret, 0};
            FieldState field;
            field.value = old_value;
            field.last_selection = last_selection;
            EditClass ec = classify_edit(old_value, new_value, pof, field, region);
            return py::make_tuple(std::string(to_string(ec.kind)), ec.reason);
        },
        py::arg("old_value"), py::arg("new_value"), py::arg("region") = "field",
        py::arg("caret") = std::nullopt, py::arg("last_selection") = std::nullopt,
        "Classify one display transition: (kind, reason).");

    m.def(
        "verify_session",
        [](const std::string& manifest_path, std::uint64_t seed, bool use_cache,
           bool full_revalidate, const std::string& ocr_engine, int jobs) {
            SessionData data = load_session(manifest_path);
            SessionVerdict v = run_session(
                data, options_from_kwargs(seed, use_cache, full_revalidate, ocr_engine, jobs));
            return verdict_to_json(v).dump();
        },
        py::arg("manifest_path"), py::arg("seed") = 1, py::arg("use_cache") = true,
        py::arg("full_revalidate") = false, py::arg("ocr_engine") = "reference",
        py::arg("jobs") = 1,
        "Replay a recorded session directory; returns the verdict as a JSON string.");

    m.def(
        "verify_and_sign",
        [](const std::string& manifest_path, const std::string& request_path,
           const std::string& key_seed_hex, std::uint64_t seed) {
            SessionData data = load_session(manifest_path);
            std::ifstream in(request_path, std::ios::binary);
            if (!in)
                throw IoError("cannot read " + request_path);
            std::string bytes((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
            Request req = parse_request(bytes);
            SessionVerdict v =
                run_session(data, options_from_kwargs(seed, true, false, "reference", 1));
            auto raw = from_hex(key_seed_hex);
            GateDecision d = sign_request(req, v, KeyPair::from_seed(raw));
            py::dict out;
            out["signed"] = d.signed_ok;
            out["reason"] = d.reason;
            out["canonical"] = d.canonical;
            out["signature_hex"] = d.signed_ok ? to_hex(d.signature) : std::string();
            out["verdict"] = verdict_to_json(v).dump();
            return out;
        },
        py::arg("manifest_path"), py::arg("request_path"), py::arg("key_seed_hex"),
        py::arg("seed") = 1,
        "Full pipeline: verdict plus the gate decision for a request file.");

    m.def(
        "keygen",
        [](const std::string& seed_hex) {
            KeyPair kp =
                seed_hex.empty() ? KeyPair::generate() : KeyPair::from_seed(from_hex(seed_hex));
            return py::make_tuple(to_hex(kp.seed), to_hex(kp.pub));
        },
        py::arg("seed_hex") = std::string(), "Ed25519 keypair as (seed_hex, pub_hex).");

    m.def(
        "verify_signature",
        [](const std::string& canonical, const std::string& pub_hex, const std::string& sig_hex) {
            return verify_signature(canonical, from_hex(pub_hex), from_hex(sig_hex));
        },
        py::arg("canonical"), py::arg("pub_hex"), py::arg("sig_hex"));

    m.def("canonical_request", [](const std::vector<std::pair<std::string, std::string>>& pairs) {
        return canonical_serialize(pairs);
    });

    m.def(
        "generate_session",
        [](const std::string& scenario, std::uint64_t seed, const std::string& out_dir,
           double perturb, bool png) {
            BuiltSession b = build_scenario(scenario, seed, perturb);
            return write_session_dir(b, out_dir, png).string();
        },
        py::arg("scenario"), py::arg("seed"), py::arg("out_dir"), py::arg("perturb") = 0.0,
        py::arg("png") = true,
        "Synthesize one session directory; returns the manifest path.");
}
