#include "sto/replay.hpp"
#include "sto/errors.hpp"

#include <algorithm>

namespace sto {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw ValidationError("replay capacity must be > 0");
    data_.reserve(std::min(capacity_, std::size_t{1} << 20));
}

void ReplayBuffer::push(const Transition& t) {
    if (data_.size() < capacity_) {
        data_.push_back(t);
    } else {
        data_[write_] = t;
    }
    write_ = (write_ + 1) % capacity_;
    ++pushed_;
}

std::vector<Transition> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
    if (data_.size() < n)
        throw ValidationError("replay buffer holds " + std::to_string(data_.size()) +
                              " transitions, cannot sample " + std::to_string(n));
    std::vector<Transition> batch;
    batch.reserve(n);
    for (std::size_t i = 0; i < n; ++i) batch.push_back(data_[rng.below(data_.size())]);
    return batch;
}

void OuNoise::set_episode(long episode, long total_episodes) {
    const double span = params_.decay_fraction * static_cast<double>(total_episodes);
    const double frac = span > 0 ? std::min(1.0, static_cast<double>(episode) / span) : 1.0;
    sigma_ = params_.sigma0 + frac * (params_.sigma_final - params_.sigma0);
    mu_ = params_.mu;
    if (params_.mu_jitter > 0)
        mu_ += (1.0 - frac) * rng_.uniform(-params_.mu_jitter, params_.mu_jitter);
}

double OuNoise::sample() {
    state_ += params_.theta * (mu_ - state_) * params_.dt +
              sigma_ * std::sqrt(params_.dt) * rng_.normal();
    return state_;
}

} // namespace sto
