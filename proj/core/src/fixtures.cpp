#include "vitnt/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "vitnt/error.hpp"

namespace vitnt {

TensorProbe probe_tensor(const Tensor& t, std::size_t index, std::size_t prefix) {
  TensorProbe p;
  p.index = index;
  p.numel = t.size();
  for (float v : t.data()) p.checksum += v;
  const auto k = std::min(prefix, t.size());
  p.prefix.assign(t.data().begin(), t.data().begin() + static_cast<std::ptrdiff_t>(k));
  return p;
}

FixtureRecord make_fixture_record(std::string image_digest, const BlockTaps& taps, std::size_t prefix) {
  FixtureRecord r;
  r.image_digest = std::move(image_digest);
  for (std::size_t b = 0; b < taps.patch_embeddings.size(); ++b) {
    r.taps.push_back(probe_tensor(taps.patch_embeddings[b], b, prefix));
  }
  for (std::size_t h = 0; h < taps.last_block_attention.size(); ++h) {
    r.attention.push_back(probe_tensor(taps.last_block_attention[h], h, prefix));
  }
  r.feature.assign(taps.final_feature.data().begin(), taps.final_feature.data().end());
  return r;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_probe(std::ostringstream& out, const char* tag, const TensorProbe& p) {
  out << tag << ' ' << p.index << ' ' << p.numel << ' ';
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", p.checksum);
  out << buf << ' ' << p.prefix.size();
  for (float v : p.prefix) out << ' ' << fmt(v);
  out << '\n';
}

}  // namespace

std::string format_fixtures(std::span<const FixtureRecord> records) {
  std::ostringstream out;
  out << "# vitnt-fixture v1\n";
  for (const auto& r : records) {
    out << "image " << r.image_digest << '\n';
    for (const auto& p : r.taps) write_probe(out, "tap", p);
    for (const auto& p : r.attention) write_probe(out, "attn", p);
    out << "feature " << r.feature.size();
    for (float v : r.feature) out << ' ' << fmt(v);
    out << "\nend\n";
  }
  return out.str();
}

std::vector<FixtureRecord> parse_fixtures(std::string_view text) {
  std::vector<FixtureRecord> records;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  FixtureRecord* current = nullptr;
  auto fail = [&](const std::string& what) { return FormatError("fixture line " + std::to_string(line_no) + ": " + what); };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "image") {
      if (current) throw fail("record not closed with 'end'");
      records.emplace_back();
      current = &records.back();
      if (!(ls >> current->image_digest)) throw fail("missing digest");
      continue;
    }
    if (!current) throw fail("'" + tag + "' outside a record");
    if (tag == "tap" || tag == "attn") {
      TensorProbe p;
      std::size_t k = 0;
      if (!(ls >> p.index >> p.numel >> p.checksum >> k)) throw fail("malformed " + tag);
      p.prefix.resize(k);
      for (auto& v : p.prefix) {
        if (!(ls >> v)) throw fail(tag + " has fewer than " + std::to_string(k) + " values");
      }
      (tag == "tap" ? current->taps : current->attention).push_back(std::move(p));
    } else if (tag == "feature") {
      std::size_t d = 0;
      if (!(ls >> d)) throw fail("malformed feature");
      current->feature.resize(d);
      for (auto& v : current->feature) {
        if (!(ls >> v)) throw fail("feature has fewer than " + std::to_string(d) + " values");
      }
    } else if (tag == "end") {
      current = nullptr;
    } else {
      throw fail("unknown tag '" + tag + "'");
    }
  }
  if (current) throw FormatError("fixture file ends inside a record");
  return records;
}

std::vector<FixtureRecord> read_fixtures(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return parse_fixtures(std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()));
}

namespace {

void compare_probes(const std::string& tag, const std::vector<TensorProbe>& expected,
                    const std::vector<TensorProbe>& found, double tol, std::vector<FixtureMismatch>& out) {
  if (expected.size() != found.size()) {
    out.push_back({tag + " count", static_cast<double>(expected.size()), static_cast<double>(found.size())});
    return;
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& e = expected[i];
    const auto& f = found[i];
    const std::string where = tag + " " + std::to_string(e.index);
    if (e.numel != f.numel) {
      out.push_back({where + " numel", static_cast<double>(e.numel), static_cast<double>(f.numel)});
      continue;
    }
    if (std::abs(e.checksum - f.checksum) > tol * static_cast<double>(e.numel)) {
      out.push_back({where + " checksum", e.checksum, f.checksum});
    }
    const std::size_t k = std::min(e.prefix.size(), f.prefix.size());
    for (std::size_t j = 0; j < k; ++j) {
      if (std::abs(static_cast<double>(e.prefix[j]) - f.prefix[j]) > tol) {
        out.push_back({where + " [" + std::to_string(j) + "]", e.prefix[j], f.prefix[j]});
      }
    }
  }
}

}  // namespace

std::vector<FixtureMismatch> compare_fixture(const FixtureRecord& expected, const BlockTaps& taps, double tolerance) {
  const std::size_t prefix = expected.taps.empty() ? kFixturePrefixLength : expected.taps.front().prefix.size();
  const FixtureRecord found = make_fixture_record(expected.image_digest, taps, prefix);
  std::vector<FixtureMismatch> out;
  compare_probes("tap", expected.taps, found.taps, tolerance, out);
  compare_probes("attn", expected.attention, found.attention, tolerance, out);
  if (expected.feature.size() != found.feature.size()) {
    out.push_back({"feature size", static_cast<double>(expected.feature.size()), static_cast<double>(found.feature.size())});
  } else {
    for (std::size_t j = 0; j < expected.feature.size(); ++j) {
      if (std::abs(static_cast<double>(expected.feature[j]) - found.feature[j]) > tolerance) {
        out.push_back({"feature [" + std::to_string(j) + "]", expected.feature[j], found.feature[j]});
      }
    }
  }
  return out;
}

}  // namespace vitnt
