#include "swarm/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "swarm/core/error.hpp"

namespace swarm::nn {

static_assert(std::endian::native == std::endian::little,
              "checkpoint encoding assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'S', 'W', 'C', 'K', 'P', 'T', '0', '1'};

template <typename T>
void write_pod(std::ostream& os, const T& value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw Error(ErrorKind::Io, "truncated checkpoint");
  return value;
}

void write_string(std::ostream& os, const std::string& s) {
  write_pod(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
  const auto n = read_pod<std::uint32_t>(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) throw Error(ErrorKind::Io, "truncated checkpoint string");
  return s;
}

const char* head_name(OutputHead head) {
  switch (head) {
    case OutputHead::Linear: return "linear";
    case OutputHead::Tanh: return "tanh";
    case OutputHead::Gaussian: return "gaussian";
  }
  return "linear";
}

OutputHead parse_head(const std::string& s) {
  if (s == "linear") return OutputHead::Linear;
  if (s == "tanh") return OutputHead::Tanh;
  if (s == "gaussian") return OutputHead::Gaussian;
  throw Error(ErrorKind::IncompatibleEncoding, "unknown output head '" + s + "'");
}

std::string hexfloat(double x) {
  std::ostringstream os;
  os << std::hexfloat << x;
  return os.str();
}

}  // namespace

const Matrix& Checkpoint::tensor(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end())
    throw Error(ErrorKind::IncompatibleEncoding, "checkpoint has no tensor '" + name + "'");
  return it->second;
}

const std::string& Checkpoint::string(const std::string& name) const {
  auto it = strings_.find(name);
  if (it == strings_.end())
    throw Error(ErrorKind::IncompatibleEncoding, "checkpoint has no entry '" + name + "'");
  return it->second;
}

void Checkpoint::put_params(const std::string& prefix, const ParamList& params) {
  for (std::size_t k = 0; k < params.size(); ++k) put(prefix + "/" + std::to_string(k), params[k]);
}

ParamList Checkpoint::params(const std::string& prefix, std::size_t count) const {
  ParamList out;
  for (std::size_t k = 0; k < count; ++k) out.push_back(tensor(prefix + "/" + std::to_string(k)));
  return out;
}

void Checkpoint::put_mlp(const std::string& prefix, const Mlp& net) {
  std::string widths;
  for (std::size_t k = 0; k < net.widths().size(); ++k) {
    if (k) widths += ',';
    widths += std::to_string(net.widths()[k]);
  }
  put_string(prefix + "/widths", widths);
  put_string(prefix + "/head", head_name(net.head()));
  put_params(prefix + "/p", net.params());
}

Mlp Checkpoint::mlp(const std::string& prefix) const {
  std::vector<int> widths;
  std::stringstream ss(string(prefix + "/widths"));
  for (std::string tok; std::getline(ss, tok, ',');) widths.push_back(std::stoi(tok));
  const OutputHead head = parse_head(string(prefix + "/head"));
  const std::size_t count = 2 * (widths.size() - 1);
  return Mlp(widths, head, params(prefix + "/p", count));
}

void Checkpoint::put_adam(const std::string& prefix, const Adam& opt) {
  put_string(prefix + "/steps", std::to_string(opt.steps()));
  put_string(prefix + "/lr", hexfloat(opt.config().lr));
  put_string(prefix + "/beta1", hexfloat(opt.config().beta1));
  put_string(prefix + "/beta2", hexfloat(opt.config().beta2));
  put_string(prefix + "/eps", hexfloat(opt.config().eps));
  put_string(prefix + "/count", std::to_string(opt.first_moment().size()));
  put_params(prefix + "/m", opt.first_moment());
  put_params(prefix + "/v", opt.second_moment());
}

Adam Checkpoint::adam(const std::string& prefix) const {
  AdamConfig cfg;
  cfg.lr = std::strtod(string(prefix + "/lr").c_str(), nullptr);
  cfg.beta1 = std::strtod(string(prefix + "/beta1").c_str(), nullptr);
  cfg.beta2 = std::strtod(string(prefix + "/beta2").c_str(), nullptr);
  cfg.eps = std::strtod(string(prefix + "/eps").c_str(), nullptr);
  const std::size_t count = std::stoul(string(prefix + "/count"));
  ParamList m = params(prefix + "/m", count);
  Adam opt(m, cfg);
  opt.first_moment() = std::move(m);
  opt.second_moment() = params(prefix + "/v", count);
  opt.set_steps(std::stol(string(prefix + "/steps")));
  return opt;
}

void Checkpoint::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorKind::Io, "cannot write checkpoint " + path);
  os.write(kMagic, sizeof(kMagic));
  write_pod(os, kVersion);
  write_pod(os, static_cast<std::uint32_t>(tensors_.size()));
  for (const auto& [name, t] : tensors_) {
    write_string(os, name);
    write_pod(os, static_cast<std::int64_t>(t.rows()));
    write_pod(os, static_cast<std::int64_t>(t.cols()));
    os.write(reinterpret_cast<const char*>(t.data()),
             static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(t.size())));
  }
  write_pod(os, static_cast<std::uint32_t>(strings_.size()));
  for (const auto& [name, value] : strings_) {
    write_string(os, name);
    write_string(os, value);
  }
  if (!os) throw Error(ErrorKind::Io, "failed writing checkpoint " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::Io, "cannot open checkpoint " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw Error(ErrorKind::IncompatibleEncoding, path + " is not a checkpoint file");
  const auto version = read_pod<std::uint32_t>(is);
  if (version != kVersion)
    throw Error(ErrorKind::IncompatibleEncoding,
                "unsupported checkpoint version " + std::to_string(version));
  Checkpoint ck;
  const auto n_tensors = read_pod<std::uint32_t>(is);
  for (std::uint32_t k = 0; k < n_tensors; ++k) {
    std::string name = read_string(is);
    const auto rows = read_pod<std::int64_t>(is);
    const auto cols = read_pod<std::int64_t>(is);
    if (rows < 0 || cols < 0) throw Error(ErrorKind::Io, "corrupt tensor shape in " + path);
    Matrix t(rows, cols);
    is.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(t.size())));
    if (!is) throw Error(ErrorKind::Io, "truncated tensor '" + name + "' in " + path);
    ck.tensors_.emplace(std::move(name), std::move(t));
  }
  const auto n_strings = read_pod<std::uint32_t>(is);
  for (std::uint32_t k = 0; k < n_strings; ++k) {
    std::string name = read_string(is);
    ck.strings_.emplace(std::move(name), read_string(is));
  }
  return ck;
}

}  // namespace swarm::nn
