#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace qdec {

// Versioned binary container of named float64 tensors. Layout (all integers
// and floats little-endian):
//   magic   8 bytes  "QDTENS01"
//   count   u32
//   then per tensor, in name order:
//     name_len u32, name bytes
//     ndim     u32, dims u64[ndim]
//     data     f64[prod(dims)]
class Checkpoint {
 public:
  struct Entry {
    std::vector<std::uint64_t> dims;
    std::vector<double> data;
  };

  void add(const std::string& name, std::span<const double> data,
           std::vector<std::uint64_t> dims);
  void add_scalar(const std::string& name, double value);

  bool has(const std::string& name) const;
  const Entry& get(const std::string& name) const;
  double get_scalar(const std::string& name) const;

  const std::map<std::string, Entry>& entries() const { return entries_; }

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

 private:
  std::map<std::string, Entry> entries_;
};

}  // namespace qdec
