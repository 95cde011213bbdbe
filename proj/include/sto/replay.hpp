#pragma once

#include "sto/env.hpp"
#include "sto/rng.hpp"

#include <cstddef>
#include <vector>

namespace sto {

struct Transition {
    Observation x;
    double a = 0;  // executed (guard-filtered) action
    double r = 0;
    Observation x_next;
    bool done = false;
};

// Fixed-capacity ring buffer with uniform sampling (with replacement).
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(const Transition& t);
    std::vector<Transition> sample(std::size_t n, Rng& rng) const;

    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::size_t total_pushed() const { return pushed_; }

private:
    std::size_t capacity_;
    std::vector<Transition> data_;
    std::size_t write_ = 0;
    std::size_t pushed_ = 0;
};

// Ornstein-Uhlenbeck exploration noise, one state per action dimension:
//   n <- n + theta (mu - n) dt + sigma sqrt(dt) xi
// sigma follows a linear decay schedule over training episodes.
class OuNoise {
public:
    struct Params {
        double theta = 0.15;
        double sigma0 = 0.2;
        double sigma_final = 0.02;
        double decay_fraction = 0.8;  // reach sigma_final after this share of episodes
        double dt = 1.0;
        double mu = 0.0;
        // Per-episode mean offset drawn in [-mu_jitter, mu_jitter]. The velocity
        // clamp at zero makes plain zero-mean noise explore only fast driving;
        // a jittered mean covers slow paces too.
        double mu_jitter = 0.0;
    };

    OuNoise(Params params, std::uint64_t seed) : params_(params), rng_(seed) {}

    void reset() { state_ = 0.0; }
    void set_episode(long episode, long total_episodes);
    double sample();

    double sigma() const { return sigma_; }
    double mean() const { return mu_; }
    double state() const { return state_; }

private:
    Params params_;
    Rng rng_;
    double state_ = 0.0;
    double sigma_ = 0.2;
    double mu_ = 0.0;
};

} // namespace sto
