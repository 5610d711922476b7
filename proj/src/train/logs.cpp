#include "swarm/train/logs.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "swarm/core/error.hpp"

namespace swarm::train {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::ofstream open_out(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  return out;
}

std::vector<std::vector<std::string>> read_rows(const std::string& path, std::size_t width) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(path);
  if (!in) return rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != width) throw Error(ErrorKind::Io, "malformed row in " + path + ": " + line);
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<TrainLogRow> read_train_log(const std::string& path) {
  std::vector<TrainLogRow> out;
  for (const auto& c : read_rows(path, 8)) {
    TrainLogRow r;
    r.phase = phase_from_string(c[0]);
    r.episode = std::stoi(c[1]);
    r.upper_return = std::stod(c[2]);
    r.lower_return = std::stod(c[3]);
    r.win = c[4] == "1";
    r.captured = std::stoi(c[5]);
    r.reached = std::stoi(c[6]);
    r.steps = std::stoi(c[7]);
    out.push_back(r);
  }
  return out;
}

void write_train_log(const std::string& path, const std::vector<TrainLogRow>& rows) {
  std::set<Phase> replaced;
  for (const auto& r : rows) replaced.insert(r.phase);
  std::vector<TrainLogRow> all;
  for (const auto& r : read_train_log(path))
    if (!replaced.count(r.phase)) all.push_back(r);
  all.insert(all.end(), rows.begin(), rows.end());
  std::stable_sort(all.begin(), all.end(), [](const TrainLogRow& a, const TrainLogRow& b) {
    if (a.phase != b.phase) return a.phase < b.phase;
    return a.episode < b.episode;
  });
  std::ofstream out = open_out(path);
  out << "phase,episode,upper_return,lower_return,win,captured,reached,steps\n";
  for (const auto& r : all)
    out << to_string(r.phase) << ',' << r.episode << ',' << format_double(r.upper_return) << ','
        << format_double(r.lower_return) << ',' << (r.win ? 1 : 0) << ',' << r.captured << ','
        << r.reached << ',' << r.steps << '\n';
}

void write_h_trace(const std::string& path, const std::vector<HTraceRow>& rows) {
  std::ofstream out = open_out(path);
  out << "episode,t,v_hat,h,span,n,mean_weight\n";
  for (const auto& r : rows)
    out << r.episode << ',' << r.t << ',' << format_double(r.v_hat) << ',' << r.h << ','
        << r.span << ',' << r.n << ',' << format_double(r.mean_weight) << '\n';
}

std::vector<HTraceRow> read_h_trace(const std::string& path) {
  std::vector<HTraceRow> out;
  for (const auto& c : read_rows(path, 7)) {
    HTraceRow r;
    r.episode = std::stoi(c[0]);
    r.t = std::stoi(c[1]);
    r.v_hat = std::stod(c[2]);
    r.h = std::stoi(c[3]);
    r.span = std::stoi(c[4]);
    r.n = std::stoi(c[5]);
    r.mean_weight = std::stod(c[6]);
    out.push_back(r);
  }
  return out;
}

void write_timing(const std::string& path, const std::vector<TimingRow>& rows) {
  std::ofstream out = open_out(path);
  out << "phase,episode,seconds\n";
  for (const auto& r : rows)
    out << to_string(r.phase) << ',' << r.episode << ',' << format_double(r.seconds) << '\n';
}

void write_manifest(const std::string& path, const std::string& phase, int episode,
                    const std::string& hash, const std::string& checkpoint) {
  nlohmann::json j{{"phase", phase}, {"episode", episode}, {"config_hash", hash},
                   {"checkpoint", checkpoint}};
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

}  // namespace swarm::train
