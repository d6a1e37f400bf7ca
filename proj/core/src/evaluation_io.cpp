#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "vitnt/error.hpp"
#include "vitnt/evaluation.hpp"

namespace vitnt {

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Calls fn(line_number, fields) for every non-blank, non-comment line.
template <typename Fn>
void for_each_record(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    fn(line_no, fields);
  }
}

float parse_float(std::string_view field, std::string_view source, std::size_t line_no) {
  float v = 0.0f;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
    throw FormatError(std::string(source) + ":" + std::to_string(line_no) + ": bad number '" + std::string(field) + "'");
  }
  return v;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

std::vector<VerificationPair> parse_pairs(std::string_view text, std::string_view source) {
  std::vector<VerificationPair> pairs;
  for_each_record(text, [&](std::size_t line_no, const std::vector<std::string_view>& f) {
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    if (f.size() != 4) throw FormatError(where + ": expected 4 tab-separated fields, got " + std::to_string(f.size()));
    VerificationPair p;
    p.id_a = std::string(f[0]);
    p.id_b = std::string(f[1]);
    p.similarity = parse_float(f[2], source, line_no);
    if (p.similarity < -1.0f - 1e-6f || p.similarity > 1.0f + 1e-6f) {
      throw FormatError(where + ": similarity " + std::string(f[2]) + " outside [-1, 1]");
    }
    if (f[3] == "1") {
      p.is_genuine = true;
    } else if (f[3] != "0") {
      throw FormatError(where + ": is_genuine must be 0 or 1");
    }
    pairs.push_back(std::move(p));
  });
  return pairs;
}

std::vector<VerificationPair> read_pairs(const std::filesystem::path& path) {
  return parse_pairs(slurp(path), path.string());
}

std::map<std::string, float, std::less<>> parse_qualities(std::string_view text, std::string_view source) {
  std::map<std::string, float, std::less<>> out;
  for_each_record(text, [&](std::size_t line_no, const std::vector<std::string_view>& f) {
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    if (f.size() != 2) throw FormatError(where + ": expected 2 tab-separated fields, got " + std::to_string(f.size()));
    if (!out.emplace(std::string(f[0]), parse_float(f[1], source, line_no)).second) {
      throw FormatError(where + ": duplicate id '" + std::string(f[0]) + "'");
    }
  });
  return out;
}

std::map<std::string, float, std::less<>> read_qualities(const std::filesystem::path& path) {
  return parse_qualities(slurp(path), path.string());
}

void attach_qualities(std::span<VerificationPair> pairs, const std::map<std::string, float, std::less<>>& qualities) {
  std::vector<std::string> missing;
  auto lookup = [&](const std::string& id, float& dst) {
    auto it = qualities.find(id);
    if (it == qualities.end()) {
      if (std::find(missing.begin(), missing.end(), id) == missing.end()) missing.push_back(id);
    } else {
      dst = it->second;
    }
  };
  for (auto& p : pairs) {
    lookup(p.id_a, p.quality_a);
    lookup(p.id_b, p.quality_b);
  }
  if (!missing.empty()) {
    std::string msg = std::to_string(missing.size()) + " id(s) in pairs have no quality score:";
    for (const auto& id : missing) msg += " " + id;
    throw ContractViolation(msg);
  }
}

std::string format_curve(const EdcCurve& curve) {
  std::ostringstream out;
  std::size_t degenerate = 0;
  for (const auto& s : curve.samples) degenerate += s.degenerate ? 1 : 0;
  out << "# fmr_target\t" << format_double(curve.fmr_target) << '\n';
  out << "# threshold\t" << format_double(curve.threshold) << '\n';
  out << "# threshold_below_resolution\t" << (curve.threshold_below_resolution ? 1 : 0) << '\n';
  out << "# auc\t" << format_double(curve.auc) << '\n';
  out << "# pauc25\t" << format_double(curve.pauc25) << '\n';
  out << "# degenerate_samples\t" << degenerate << '\n';
  out << "# r\tfnmr\n";
  for (const auto& s : curve.samples) out << format_double(s.reject_fraction) << '\t' << format_double(s.fnmr) << '\n';
  return out.str();
}

}  // namespace vitnt
