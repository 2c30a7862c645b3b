#pragma once

#include "uiattest/context.hpp"

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace uiattest {

// Randomized capture cadence. Defaults keep mean + 3*std at the exposure
// limit: an overlay must stay up longer than `exposure_limit_ms` to have a
// practical chance of never being sampled.
struct SamplerConfig {
    double mean_ms = 250.0;
    double std_ms = 83.0;
    double exposure_limit_ms = 500.0;
    double min_interval_ms = 1.0;
    std::uint64_t seed = 1;

    void validate() const; // throws std::invalid_argument
};

// Deterministic normal draws: mt19937_64 + Box-Muller, both halves consumed.
// std::normal_distribution is implementation-defined, hence unusable here.
class GaussianSampler {
public:
    explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}
    double next(double mean, double std);

private:
    double uniform01(); // in (0,1]
    std::mt19937_64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

class FrameSource {
public:
    virtual ~FrameSource() = default;
    // Frame visible at time t. Throws TruncationError when t precedes
    // the recording.
    virtual const Frame& at(std::int64_t t_ms) = 0;
};

class TruncationError : public std::runtime_error {
public:
    explicit TruncationError(const std::string& what) : std::runtime_error(what) {}
};

// Step-function replay over a recorded frame list: the frame at t is the
// last recorded frame with t_ms <= t.
class ReplayFrameSource : public FrameSource {
public:
    explicit ReplayFrameSource(const std::vector<Frame>* frames);
    const Frame& at(std::int64_t t_ms) override;

private:
    const std::vector<Frame>* frames_;
};

struct SampledFrame {
    std::int64_t t_ms = 0; // observation time
    const Frame* frame = nullptr;
};

// Sample times only; strictly increasing, starts at start_t, ends at end_t.
std::vector<std::int64_t> sample_schedule(const SamplerConfig& cfg,
                                          std::int64_t start_t, std::int64_t end_t);

std::vector<SampledFrame> acquire_context(const SamplerConfig& cfg, FrameSource& source,
                                          std::int64_t start_t, std::int64_t end_t);

} // namespace uiattest
