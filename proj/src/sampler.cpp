#include "uiattest/sampler.hpp"

#include <cmath>
#include <stdexcept>

namespace uiattest {

void SamplerConfig::validate() const {
    if (mean_ms <= 0 || std_ms < 0 || min_interval_ms <= 0)
        throw std::invalid_argument("sampler config: non-positive parameter");
    if (mean_ms + 3.0 * std_ms > exposure_limit_ms + 1e-9)
        throw std::invalid_argument("sampler config: mean + 3*std exceeds exposure limit");
}

double GaussianSampler::uniform01() {
    // 53-bit mantissa in [0,1); flip to (0,1] so log() is safe
    double u = (rng_() >> 11) * 0x1.0p-53;
    return 1.0 - u;
}

double GaussianSampler::next(double mean, double std) {
    if (have_spare_) {
        have_spare_ = false;
        return mean + std * spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return mean + std * r * std::cos(a);
}

ReplayFrameSource::ReplayFrameSource(const std::vector<Frame>* frames) : frames_(frames) {
    if (!frames_ || frames_->empty())
        throw std::invalid_argument("replay source needs at least one frame");
}

const Frame& ReplayFrameSource::at(std::int64_t t_ms) {
    const Frame* last = nullptr;
    for (const auto& f : *frames_) {
        if (f.t_ms() > t_ms) break;
        last = &f;
    }
    if (!last)
        throw TruncationError("no frame recorded at or before t=" + std::to_string(t_ms));
    return *last;
}

std::vector<std::int64_t> sample_schedule(const SamplerConfig& cfg,
                                          std::int64_t start_t, std::int64_t end_t) {
    cfg.validate();
    if (end_t < start_t)
        throw std::invalid_argument("sample_schedule: end before start");
    GaussianSampler g(cfg.seed);
    std::vector<std::int64_t> out;
    out.push_back(start_t);
    double t = static_cast<double>(start_t);
    for (;;) {
        double iv = g.next(cfg.mean_ms, cfg.std_ms);
        if (iv < cfg.min_interval_ms) iv = cfg.min_interval_ms;
        t += iv;
        std::int64_t ti = std::llround(t);
        if (ti >= end_t) break;
        if (ti > out.back()) // llround can stall only at sub-ms intervals
            out.push_back(ti);
    }
    // final observation always happens at end_t; in the degenerate
    // end_t == start_t session this duplicates the start sample on purpose
    out.push_back(end_t);
    return out;
}

std::vector<SampledFrame> acquire_context(const SamplerConfig& cfg, FrameSource& source,
                                          std::int64_t start_t, std::int64_t end_t) {
    std::vector<SampledFrame> out;
    for (std::int64_t t : sample_schedule(cfg, start_t, end_t))
        out.push_back(SampledFrame{t, &source.at(t)});
    return out;
}

} // namespace uiattest
