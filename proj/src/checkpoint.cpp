#include "geonav/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace geonav {

namespace {

void write_u8(std::ostream& out, std::uint8_t v) { out.put(static_cast<char>(v)); }

void write_u32(std::ostream& out, std::uint32_t v) {
    for (int k = 0; k < 4; ++k) out.put(static_cast<char>((v >> (8 * k)) & 0xff));
}

void write_u64(std::ostream& out, std::uint64_t v) {
    for (int k = 0; k < 8; ++k) out.put(static_cast<char>((v >> (8 * k)) & 0xff));
}

void write_f64(std::ostream& out, double v) { write_u64(out, std::bit_cast<std::uint64_t>(v)); }

void write_string(std::ostream& out, const std::string& s) {
    if (s.size() > 0xffff) throw std::invalid_argument("checkpoint name too long");
    write_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void write_blob(std::ostream& out, const std::vector<double>& v) {
    write_u64(out, v.size());
    for (double x : v) write_f64(out, x);
}

std::uint8_t read_u8(std::istream& in) {
    int c = in.get();
    if (c == EOF) throw std::runtime_error("truncated checkpoint");
    return static_cast<std::uint8_t>(c);
}

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(read_u8(in)) << (8 * k);
    return v;
}

std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(read_u8(in)) << (8 * k);
    return v;
}

double read_f64(std::istream& in) { return std::bit_cast<double>(read_u64(in)); }

std::string read_string(std::istream& in) {
    std::uint32_t n = read_u32(in);
    std::string s(n, '\0');
    in.read(s.data(), n);
    if (!in) throw std::runtime_error("truncated checkpoint");
    return s;
}

std::vector<double> read_blob(std::istream& in) {
    std::uint64_t n = read_u64(in);
    std::vector<double> v(n);
    for (std::uint64_t k = 0; k < n; ++k) v[k] = read_f64(in);
    return v;
}

void write_network(std::ostream& out, const Network& net) {
    write_u32(out, static_cast<std::uint32_t>(net.layers().size()));
    for (const DenseLayer& l : net.layers()) {
        write_u32(out, static_cast<std::uint32_t>(l.in_dim));
        write_u32(out, static_cast<std::uint32_t>(l.out_dim));
        write_u8(out, static_cast<std::uint8_t>(l.activation));
        write_blob(out, l.weights);
        write_blob(out, l.bias);
    }
}

Network read_network(std::istream& in) {
    std::uint32_t n_layers = read_u32(in);
    Network net;
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        DenseLayer layer;
        layer.in_dim = static_cast<int>(read_u32(in));
        layer.out_dim = static_cast<int>(read_u32(in));
        layer.activation = static_cast<Activation>(read_u8(in));
        layer.weights = read_blob(in);
        layer.bias = read_blob(in);
        if (layer.weights.size() !=
                static_cast<std::size_t>(layer.in_dim) * static_cast<std::size_t>(layer.out_dim) ||
            layer.bias.size() != static_cast<std::size_t>(layer.out_dim)) {
            throw std::runtime_error("checkpoint layer shape mismatch");
        }
        net.layers().push_back(std::move(layer));
    }
    return net;
}

void write_adam(std::ostream& out, const AdamState& s) {
    write_f64(out, s.learning_rate);
    write_f64(out, s.beta1);
    write_f64(out, s.beta2);
    write_f64(out, s.epsilon);
    write_u64(out, static_cast<std::uint64_t>(s.step));
    write_u32(out, static_cast<std::uint32_t>(s.m_w.size()));
    for (std::size_t l = 0; l < s.m_w.size(); ++l) {
        write_blob(out, s.m_w[l]);
        write_blob(out, s.v_w[l]);
        write_blob(out, s.m_b[l]);
        write_blob(out, s.v_b[l]);
    }
}

AdamState read_adam(std::istream& in) {
    AdamState s;
    s.learning_rate = read_f64(in);
    s.beta1 = read_f64(in);
    s.beta2 = read_f64(in);
    s.epsilon = read_f64(in);
    s.step = static_cast<std::int64_t>(read_u64(in));
    std::uint32_t n = read_u32(in);
    s.m_w.resize(n);
    s.v_w.resize(n);
    s.m_b.resize(n);
    s.v_b.resize(n);
    for (std::uint32_t l = 0; l < n; ++l) {
        s.m_w[l] = read_blob(in);
        s.v_w[l] = read_blob(in);
        s.m_b[l] = read_blob(in);
        s.v_b[l] = read_blob(in);
    }
    return s;
}

}  // namespace

void Checkpoint::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
    out.write(kMagic, 4);
    write_u32(out, kVersion);
    write_u64(out, config_hash);
    write_u32(out, static_cast<std::uint32_t>(networks.size()));
    for (const auto& [name, net] : networks) {
        write_string(out, name);
        write_network(out, net);
    }
    write_u32(out, static_cast<std::uint32_t>(adam_states.size()));
    for (const auto& [name, st] : adam_states) {
        write_string(out, name);
        write_adam(out, st);
    }
    write_u32(out, static_cast<std::uint32_t>(counters.size()));
    for (const auto& [name, v] : counters) {
        write_string(out, name);
        write_u64(out, v);
    }
    if (!out) throw std::runtime_error("checkpoint write failed: " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error("not a checkpoint file: " + path.string());
    }
    std::uint32_t version = read_u32(in);
    if (version != kVersion) {
        throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
    }
    Checkpoint ck;
    ck.config_hash = read_u64(in);
    std::uint32_t n_nets = read_u32(in);
    for (std::uint32_t k = 0; k < n_nets; ++k) {
        std::string name = read_string(in);
        ck.networks.emplace(std::move(name), read_network(in));
    }
    std::uint32_t n_adam = read_u32(in);
    for (std::uint32_t k = 0; k < n_adam; ++k) {
        std::string name = read_string(in);
        ck.adam_states.emplace(std::move(name), read_adam(in));
    }
    std::uint32_t n_counters = read_u32(in);
    for (std::uint32_t k = 0; k < n_counters; ++k) {
        std::string name = read_string(in);
        ck.counters.emplace(std::move(name), read_u64(in));
    }
    return ck;
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view tag) {
    return splitmix64(master_seed ^ fnv1a(tag));
}

}  // namespace geonav
