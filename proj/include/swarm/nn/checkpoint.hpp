#pragma once

#include <map>
#include <string>

#include "swarm/nn/adam.hpp"
#include "swarm/nn/mlp.hpp"

namespace swarm::nn {

/// Versioned binary container of named tensors and strings.
///
/// Layout (little-endian): magic "SWCKPT01", u32 version, u32 tensor count,
/// then per tensor {u32 name length, name bytes, i64 rows, i64 cols,
/// rows*cols f64 column-major}, then u32 string count and per string
/// {u32 name length, name, u32 value length, value}. Doubles are stored raw,
/// so a save/load cycle is bit-exact.
class Checkpoint {
 public:
  static constexpr std::uint32_t kVersion = 1;

  void put(const std::string& name, const Matrix& tensor) { tensors_[name] = tensor; }
  void put_string(const std::string& name, const std::string& value) { strings_[name] = value; }
  bool has(const std::string& name) const { return tensors_.count(name) > 0; }
  bool has_string(const std::string& name) const { return strings_.count(name) > 0; }
  const Matrix& tensor(const std::string& name) const;
  const std::string& string(const std::string& name) const;

  void put_params(const std::string& prefix, const ParamList& params);
  ParamList params(const std::string& prefix, std::size_t count) const;

  void put_mlp(const std::string& prefix, const Mlp& net);
  Mlp mlp(const std::string& prefix) const;

  void put_adam(const std::string& prefix, const Adam& opt);
  Adam adam(const std::string& prefix) const;

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

  const std::map<std::string, Matrix>& tensors() const { return tensors_; }
  const std::map<std::string, std::string>& strings() const { return strings_; }

 private:
  std::map<std::string, Matrix> tensors_;
  std::map<std::string, std::string> strings_;
};

}  // namespace swarm::nn
