#include "sto/checkpoint.hpp"
#include "sto/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace sto {

namespace {

constexpr const char* kMagic = "STO-CHECKPOINT v1";

void write_doubles(std::ofstream& out, const std::vector<double>& values) {
    static_assert(std::endian::native == std::endian::little,
                  "checkpoint writer assumes a little-endian host");
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
}

void read_doubles(std::ifstream& in, std::vector<double>& values) {
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!in) throw ParseError("checkpoint payload truncated");
}

} // namespace

const Mlp& Checkpoint::net(const std::string& name) const {
    for (const auto& [n, net] : nets)
        if (n == name) return net;
    throw ParseError("checkpoint has no network named '" + name + "'");
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path);
    out << kMagic << "\n";
    out << "algo " << ckpt.algo << "\n";
    out << "seed " << ckpt.seed << "\n";
    for (const auto& [k, v] : ckpt.meta) out << "meta " << k << " " << v << "\n";
    for (const auto& [name, net] : ckpt.nets) {
        out << "net " << name << " " << net.layer_count() << "\n";
        for (const LayerSpec& spec : net.specs())
            out << "layer " << spec.input_dim << " " << spec.output_dim << " "
                << to_string(spec.activation) << "\n";
    }
    out << "DATA\n";
    for (const auto& [name, net] : ckpt.nets) {
        for (std::size_t l = 0; l < net.layer_count(); ++l) {
            write_doubles(out, net.weights(l));
            write_doubles(out, net.biases(l));
        }
    }
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != kMagic)
        throw ParseError(path + ": not a checkpoint file (bad magic)");

    Checkpoint ckpt;
    std::vector<std::pair<std::string, std::vector<LayerSpec>>> pending;
    while (std::getline(in, line)) {
        if (line == "DATA") break;
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "algo") {
            ss >> ckpt.algo;
        } else if (tag == "seed") {
            ss >> ckpt.seed;
        } else if (tag == "meta") {
            std::string key;
            ss >> key;
            std::string value;
            std::getline(ss, value);
            if (!value.empty() && value.front() == ' ') value.erase(0, 1);
            ckpt.meta[key] = value;
        } else if (tag == "net") {
            std::string name;
            std::size_t layers = 0;
            ss >> name >> layers;
            pending.emplace_back(name, std::vector<LayerSpec>{});
            pending.back().second.reserve(layers);
        } else if (tag == "layer") {
            if (pending.empty()) throw ParseError(path + ": layer before net");
            LayerSpec spec;
            std::string act;
            ss >> spec.input_dim >> spec.output_dim >> act;
            spec.activation = activation_from_string(act);
            pending.back().second.push_back(spec);
        } else {
            throw ParseError(path + ": unknown header line '" + line + "'");
        }
    }
    if (line != "DATA") throw ParseError(path + ": missing DATA marker");

    for (auto& [name, specs] : pending) {
        Mlp net(specs);
        for (std::size_t l = 0; l < net.layer_count(); ++l) {
            read_doubles(in, net.weights(l));
            read_doubles(in, net.biases(l));
        }
        ckpt.nets.emplace_back(name, std::move(net));
    }
    return ckpt;
}

} // namespace sto
