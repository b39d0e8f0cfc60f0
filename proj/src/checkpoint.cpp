#include "qdec/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace qdec {

static_assert(std::endian::native == std::endian::little,
              "checkpoint container assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'Q', 'D', 'T', 'E', 'N', 'S', '0', '1'};

template <typename T>
void write_pod(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return value;
}

}  // namespace

void Checkpoint::add(const std::string& name, std::span<const double> data,
                     std::vector<std::uint64_t> dims) {
  std::uint64_t expected = 1;
  for (std::uint64_t d : dims) expected *= d;
  if (expected != data.size())
    throw std::invalid_argument("Checkpoint::add: dims do not match data size for " + name);
  if (entries_.count(name))
    throw std::invalid_argument("Checkpoint::add: duplicate tensor " + name);
  entries_[name] = Entry{std::move(dims), std::vector<double>(data.begin(), data.end())};
}

void Checkpoint::add_scalar(const std::string& name, double value) {
  add(name, std::span<const double>(&value, 1), {1});
}

bool Checkpoint::has(const std::string& name) const { return entries_.count(name) != 0; }

const Checkpoint::Entry& Checkpoint::get(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end())
    throw std::invalid_argument("Checkpoint: missing tensor " + name);
  return it->second;
}

double Checkpoint::get_scalar(const std::string& name) const {
  const Entry& e = get(name);
  if (e.data.size() != 1)
    throw std::invalid_argument("Checkpoint: tensor " + name + " is not a scalar");
  return e.data[0];
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("Checkpoint::save: cannot open " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(entries_.size()));
  for (const auto& [name, entry] : entries_) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(entry.dims.size()));
    for (std::uint64_t d : entry.dims) write_pod<std::uint64_t>(out, d);
    out.write(reinterpret_cast<const char*>(entry.data.data()),
              static_cast<std::streamsize>(entry.data.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("Checkpoint::save: write failed for " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("Checkpoint::load: cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("Checkpoint::load: bad magic in " + path.string());

  Checkpoint ckpt;
  const auto count = read_pod<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = read_pod<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw std::runtime_error("checkpoint: truncated file");

    Entry entry;
    const auto ndim = read_pod<std::uint32_t>(in);
    entry.dims.resize(ndim);
    std::uint64_t total = 1;
    for (auto& d : entry.dims) {
      d = read_pod<std::uint64_t>(in);
      total *= d;
    }
    entry.data.resize(total);
    in.read(reinterpret_cast<char*>(entry.data.data()),
            static_cast<std::streamsize>(total * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint: truncated file");
    ckpt.entries_[name] = std::move(entry);
  }
  return ckpt;
}

}  // namespace qdec
