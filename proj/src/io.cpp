#include "lse/io.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace lse::io {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void atomic_write(const std::string& path, const std::string& content) {
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
  if (ec) throw IoError("cannot create directory for '" + path + "': " + ec.message());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out << content;
    if (!out.flush()) throw IoError("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("cannot rename '" + tmp.string() + "' to '" + path + "': " + ec.message());
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string signal_csv(const Observation& obs) {
  obs.validate();
  std::string out = "index,re,im\n";
  for (int j = 0; j < obs.sample_set.L(); ++j) {
    out += std::to_string(obs.sample_set.omega()[j]);
    out += ',';
    out += format_double(obs.y[j].real());
    out += ',';
    out += format_double(obs.y[j].imag());
    out += '\n';
  }
  return out;
}

void write_signal_csv(const std::string& path, const Observation& obs) {
  atomic_write(path, signal_csv(obs));
}

namespace {

double parse_number(const std::string& field, int line) {
  double v = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\r')) --last;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw IoError("signal CSV line " + std::to_string(line) + ": bad number '" + field + "'");
  return v;
}

}  // namespace

Observation parse_signal_csv(const std::string& text, int M) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::vector<int> idx;
  std::vector<cplx> vals;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (lineno == 1 && line.rfind("index", 0) == 0) continue;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    if (fields.size() != 3)
      throw IoError("signal CSV line " + std::to_string(lineno) + ": expected index,re,im");
    const double index = parse_number(fields[0], lineno);
    if (index != static_cast<int>(index))
      throw IoError("signal CSV line " + std::to_string(lineno) + ": index must be an integer");
    idx.push_back(static_cast<int>(index));
    vals.emplace_back(parse_number(fields[1], lineno), parse_number(fields[2], lineno));
  }
  if (idx.empty()) throw IoError("signal CSV has no samples");
  if (M <= 0) M = *std::max_element(idx.begin(), idx.end());
  Observation obs;
  try {
    obs.sample_set = SampleSet(idx, M);
  } catch (const Error& e) {
    throw IoError(std::string("signal CSV: ") + e.what());
  }
  obs.y = Eigen::Map<const VectorXcd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  return obs;
}

Observation read_signal_csv(const std::string& path, int M) {
  return parse_signal_csv(read_file(path), M);
}

}  // namespace lse::io
