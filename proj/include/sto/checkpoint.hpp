#pragma once

#include "sto/mlp.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace sto {

// Versioned checkpoint container: a plain-text header (algorithm, seed, config
// echo, architectures) followed by raw little-endian 64-bit weight arrays in
// layer order (weights then biases per layer, networks in header order).
struct Checkpoint {
    std::string algo;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> meta;
    std::vector<std::pair<std::string, Mlp>> nets;

    const Mlp& net(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

} // namespace sto
