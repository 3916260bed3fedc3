#include "socnav/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "socnav/error.hpp"

namespace socnav::nn {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'S', 'N', 'C', 'K'};
constexpr std::uint32_t kMaxWidth = 1u << 20;

template <typename T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

void put_string(std::ostream& out, const std::string& s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T get(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (in.gcount() != static_cast<std::streamsize>(sizeof(T))) throw TruncatedFileError("checkpoint file is truncated");
    return value;
}

std::string get_string(std::istream& in) {
    const auto n = get<std::uint32_t>(in);
    if (n > (1u << 24)) throw ShapeMismatchError("checkpoint string length is implausible");
    std::string s(n, '\0');
    in.read(s.data(), n);
    if (in.gcount() != static_cast<std::streamsize>(n)) throw TruncatedFileError("checkpoint file is truncated");
    return s;
}

void get_doubles(std::istream& in, double* dst, std::size_t n) {
    const std::size_t bytes = n * sizeof(double);
    in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(bytes));
    if (in.gcount() != static_cast<std::streamsize>(bytes)) throw TruncatedFileError("checkpoint payload is truncated");
}

}  // namespace

const Mlp& Checkpoint::net(const std::string& name) const {
    for (const auto& n : nets)
        if (n.name == name) return n.net;
    throw std::out_of_range("checkpoint has no network named '" + name + "'");
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
    out.write(kMagic, 4);
    put<std::uint32_t>(out, kCheckpointVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.nets.size()));
    put<std::uint64_t>(out, ckpt.metadata.episodes);
    put<std::uint32_t>(out, ckpt.metadata.curriculum_stage);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.metadata.extra.size()));
    for (const auto& [k, v] : ckpt.metadata.extra) {
        put_string(out, k);
        put_string(out, v);
    }
    std::uint64_t total = 0;
    for (const auto& [name, net] : ckpt.nets) {
        put_string(out, name);
        const auto& spec = net.spec();
        put<std::uint32_t>(out, static_cast<std::uint32_t>(spec.widths.size()));
        for (const int w : spec.widths) put<std::uint32_t>(out, static_cast<std::uint32_t>(w));
        put<std::uint8_t>(out, spec.output_relu ? 1 : 0);
        put<std::uint64_t>(out, spec.parameter_count());
        total += spec.parameter_count();
    }
    put<std::uint64_t>(out, total * sizeof(double));
    for (const auto& [name, net] : ckpt.nets) {
        for (std::size_t l = 0; l < net.layer_count(); ++l) {
            const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w = net.weight(l);
            out.write(reinterpret_cast<const char*>(w.data()), static_cast<std::streamsize>(w.size() * sizeof(double)));
            out.write(reinterpret_cast<const char*>(net.bias(l).data()),
                      static_cast<std::streamsize>(net.bias(l).size() * sizeof(double)));
        }
    }
    if (!out) throw Error("failed to write checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
    char magic[4] = {};
    in.read(magic, 4);
    if (in.gcount() != 4) throw TruncatedFileError("checkpoint file is truncated");
    if (std::memcmp(magic, kMagic, 4) != 0) throw Error("not a checkpoint file (bad magic)");
    const auto version = get<std::uint32_t>(in);
    if (version != kCheckpointVersion) throw CheckpointVersionError(version, kCheckpointVersion);

    Checkpoint ckpt;
    const auto net_count = get<std::uint32_t>(in);
    if (net_count > 4096) throw ShapeMismatchError("checkpoint network count is implausible");
    ckpt.metadata.episodes = get<std::uint64_t>(in);
    ckpt.metadata.curriculum_stage = get<std::uint32_t>(in);
    const auto kv = get<std::uint32_t>(in);
    for (std::uint32_t i = 0; i < kv; ++i) {
        std::string k = get_string(in);
        ckpt.metadata.extra[std::move(k)] = get_string(in);
    }

    std::uint64_t total = 0;
    std::vector<std::pair<std::string, MlpSpec>> specs;
    for (std::uint32_t n = 0; n < net_count; ++n) {
        std::string name = get_string(in);
        MlpSpec spec;
        const auto width_count = get<std::uint32_t>(in);
        if (width_count < 2 || width_count > 1024)
            throw ShapeMismatchError("network '" + name + "' declares " + std::to_string(width_count) + " widths");
        for (std::uint32_t i = 0; i < width_count; ++i) {
            const auto w = get<std::uint32_t>(in);
            if (w == 0 || w > kMaxWidth)
                throw ShapeMismatchError("network '" + name + "' declares invalid width " + std::to_string(w));
            spec.widths.push_back(static_cast<int>(w));
        }
        spec.output_relu = get<std::uint8_t>(in) != 0;
        const auto declared = get<std::uint64_t>(in);
        if (declared != spec.parameter_count())
            throw ShapeMismatchError("network '" + name + "' declares " + std::to_string(declared) +
                                     " parameters but its widths imply " + std::to_string(spec.parameter_count()));
        total += declared;
        specs.emplace_back(std::move(name), std::move(spec));
    }
    const auto payload = get<std::uint64_t>(in);
    if (payload != total * sizeof(double))
        throw ShapeMismatchError("checkpoint payload size disagrees with the layer widths");

    for (auto& [name, spec] : specs) {
        Mlp net(spec);
        for (std::size_t l = 0; l < net.layer_count(); ++l) {
            Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w(spec.widths[l + 1], spec.widths[l]);
            get_doubles(in, w.data(), static_cast<std::size_t>(w.size()));
            net.mutable_weight(l) = w;
            get_doubles(in, net.mutable_bias(l).data(), static_cast<std::size_t>(spec.widths[l + 1]));
        }
        ckpt.nets.push_back({std::move(name), std::move(net)});
    }
    return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    write_checkpoint(out, checkpoint);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint " + path.string());
    return read_checkpoint(in);
}

}  // namespace socnav::nn
