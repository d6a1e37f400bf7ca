#include "vitnt/model_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "vitnt/error.hpp"

namespace vitnt {

std::string_view to_string(FeaturePooling pooling) {
  return pooling == FeaturePooling::class_token ? "class_token" : "mean_patch";
}

FeaturePooling parse_feature_pooling(std::string_view text) {
  if (text == "mean_patch") return FeaturePooling::mean_patch;
  if (text == "class_token") return FeaturePooling::class_token;
  throw FormatError("unknown feature_pooling '" + std::string(text) + "'");
}

std::size_t VitConfig::mlp_hidden_dim() const {
  return static_cast<std::size_t>(std::llround(static_cast<double>(embed_dim) * mlp_ratio));
}

std::vector<std::string> VitConfig::check() const {
  std::vector<std::string> problems;
  if (image_size == 0 || patch_size == 0 || embed_dim == 0 || num_blocks == 0 || num_heads == 0) {
    problems.emplace_back("image_size, patch_size, embed_dim, num_blocks and num_heads must be positive");
    return problems;
  }
  if (image_size % patch_size != 0) {
    problems.push_back("image_size " + std::to_string(image_size) + " is not divisible by patch_size " +
                       std::to_string(patch_size));
  }
  if (embed_dim % num_heads != 0) {
    problems.push_back("embed_dim " + std::to_string(embed_dim) + " is not divisible by num_heads " +
                       std::to_string(num_heads));
  }
  const double hidden = static_cast<double>(embed_dim) * mlp_ratio;
  if (!(mlp_ratio > 0.0) || std::abs(hidden - std::round(hidden)) > 1e-9 || std::round(hidden) < 1.0) {
    problems.push_back("mlp_ratio " + std::to_string(mlp_ratio) + " does not give a positive integer hidden width");
  }
  if (feature_pooling == FeaturePooling::class_token && !has_class_token) {
    problems.emplace_back("feature_pooling class_token requires has_class_token");
  }
  if (!(layer_norm_eps > 0.0)) problems.emplace_back("layer_norm_eps must be positive");
  return problems;
}

namespace tensor_names {
std::string block(std::size_t index, std::string_view leaf) {
  std::string name = "block" + std::to_string(index) + ".";
  name.append(leaf);
  return name;
}
}  // namespace tensor_names

std::vector<std::pair<std::string, Shape>> expected_tensors(const VitConfig& c) {
  namespace tn = tensor_names;
  const std::size_t d = c.embed_dim;
  const std::size_t hidden = c.mlp_hidden_dim();
  std::vector<std::pair<std::string, Shape>> out{
      {std::string(tn::kPatchWeight), {d, c.patch_dim()}},
      {std::string(tn::kPatchBias), {d}},
      {std::string(tn::kPosEmbed), {c.sequence_length(), d}},
      {std::string(tn::kNormGamma), {d}},
      {std::string(tn::kNormBeta), {d}},
  };
  if (c.has_class_token) out.emplace_back(std::string(tn::kClassToken), Shape{d});
  for (std::size_t b = 0; b < c.num_blocks; ++b) {
    out.emplace_back(tn::block(b, tn::kLn1Gamma), Shape{d});
    out.emplace_back(tn::block(b, tn::kLn1Beta), Shape{d});
    out.emplace_back(tn::block(b, tn::kQkvWeight), Shape{3 * d, d});
    out.emplace_back(tn::block(b, tn::kQkvBias), Shape{3 * d});
    out.emplace_back(tn::block(b, tn::kAttnOutWeight), Shape{d, d});
    out.emplace_back(tn::block(b, tn::kAttnOutBias), Shape{d});
    out.emplace_back(tn::block(b, tn::kLn2Gamma), Shape{d});
    out.emplace_back(tn::block(b, tn::kLn2Beta), Shape{d});
    out.emplace_back(tn::block(b, tn::kFc1Weight), Shape{hidden, d});
    out.emplace_back(tn::block(b, tn::kFc1Bias), Shape{hidden});
    out.emplace_back(tn::block(b, tn::kFc2Weight), Shape{d, hidden});
    out.emplace_back(tn::block(b, tn::kFc2Bias), Shape{d});
  }
  std::sort(out.begin(), out.end());
  return out;
}

const Tensor& VitModel::at(std::string_view name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw ValidationError("model has no tensor '" + std::string(name) + "'");
  return it->second;
}

const Tensor& VitModel::block(std::size_t index, std::string_view leaf) const {
  return at(tensor_names::block(index, leaf));
}

std::string Violation::describe() const {
  std::ostringstream out;
  out << subject << ": " << message;
  if (expected) {
    out << " (expected " << shape_to_string(*expected) << ", found "
        << (found ? shape_to_string(*found) : std::string("nothing")) << ")";
  }
  return out.str();
}

std::vector<Violation> validate_model(const VitModel& model) {
  std::vector<Violation> violations;
  const auto problems = model.config.check();
  for (const auto& p : problems) violations.push_back({"config", std::nullopt, std::nullopt, p});
  if (!problems.empty()) return violations;

  for (const auto& [name, shape] : expected_tensors(model.config)) {
    auto it = model.tensors.find(name);
    if (it == model.tensors.end()) {
      violations.push_back({name, shape, std::nullopt, "missing tensor"});
    } else if (it->second.shape() != shape) {
      violations.push_back({name, shape, it->second.shape(), "shape mismatch"});
    }
  }
  return violations;
}

std::string encode_config_header(const VitConfig& c) {
  nlohmann::json j;
  j["image_size"] = c.image_size;
  j["patch_size"] = c.patch_size;
  j["embed_dim"] = c.embed_dim;
  j["num_blocks"] = c.num_blocks;
  j["num_heads"] = c.num_heads;
  j["mlp_ratio"] = c.mlp_ratio;
  j["has_class_token"] = c.has_class_token;
  j["feature_pooling"] = std::string(to_string(c.feature_pooling));
  j["layer_norm_eps"] = c.layer_norm_eps;
  return j.dump();  // keys come out sorted
}

VitConfig decode_config_header(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("VWTF header is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("VWTF header must be a JSON object");
  VitConfig c;
  try {
    c.image_size = j.at("image_size").get<std::size_t>();
    c.patch_size = j.at("patch_size").get<std::size_t>();
    c.embed_dim = j.at("embed_dim").get<std::size_t>();
    c.num_blocks = j.at("num_blocks").get<std::size_t>();
    c.num_heads = j.at("num_heads").get<std::size_t>();
    c.mlp_ratio = j.at("mlp_ratio").get<double>();
    c.has_class_token = j.value("has_class_token", false);
    c.feature_pooling = parse_feature_pooling(j.value("feature_pooling", std::string("mean_patch")));
    c.layer_norm_eps = j.value("layer_norm_eps", 1e-6);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("VWTF header field error: ") + e.what());
  }
  return c;
}

namespace {

constexpr char kMagic[4] = {'V', 'W', 'T', 'F'};

template <typename U>
void put_le(std::string& buf, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) buf.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  Reader(std::string bytes, std::string path) : bytes_(std::move(bytes)), path_(std::move(path)) {}

  template <typename U>
  U get(const char* what) {
    need(sizeof(U), what);
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      value |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return value;
  }

  std::string_view take(std::size_t n, const char* what) {
    need(n, what);
    std::string_view out(bytes_.data() + pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  const std::string& path() const { return path_; }

 private:
  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw LengthError(path_ + ": truncated while reading " + what + " at byte " + std::to_string(pos_) +
                        " (need " + std::to_string(n) + ", have " + std::to_string(remaining()) + ")");
    }
  }

  std::string bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

VitModel read_model_unchecked(const std::filesystem::path& path) {
  Reader r(read_file(path), path.string());
  if (r.take(4, "magic") != std::string_view(kMagic, 4)) {
    throw FormatError(r.path() + ": bad magic, not a VWTF file");
  }
  const auto version = r.get<std::uint32_t>("version");
  if (version != kVwtfVersion) {
    throw FormatError(r.path() + ": unsupported VWTF version " + std::to_string(version));
  }
  const auto header_len = r.get<std::uint32_t>("header length");
  VitModel model;
  model.config = decode_config_header(r.take(header_len, "header"));

  const auto count = r.get<std::uint32_t>("tensor count");
  for (std::uint32_t t = 0; t < count; ++t) {
    const auto name_len = r.get<std::uint32_t>("tensor name length");
    std::string name(r.take(name_len, "tensor name"));
    const auto rank = r.get<std::uint32_t>("tensor rank");
    if (rank == 0 || rank > 8) throw FormatError(r.path() + ": tensor '" + name + "' has invalid rank " + std::to_string(rank));
    Shape shape(rank);
    std::uint64_t numel = 1;
    for (auto& d : shape) {
      const auto dim = r.get<std::uint64_t>("tensor dims");
      if (dim == 0) throw FormatError(r.path() + ": tensor '" + name + "' has a zero dimension");
      if (dim > (std::uint64_t{1} << 32) || numel > (std::uint64_t{1} << 34) / dim) {
        throw LengthError(r.path() + ": tensor '" + name + "' dims are implausibly large");
      }
      numel *= dim;
      d = static_cast<std::size_t>(dim);
    }
    if (numel * 4 > r.remaining()) {
      throw LengthError(r.path() + ": payload of tensor '" + name + "' " + shape_to_string(shape) +
                        " is truncated (need " + std::to_string(numel * 4) + " bytes, have " +
                        std::to_string(r.remaining()) + ")");
    }
    std::vector<float> data(static_cast<std::size_t>(numel));
    for (auto& v : data) v = std::bit_cast<float>(r.get<std::uint32_t>("tensor payload"));
    if (!model.tensors.emplace(name, Tensor(std::move(shape), std::move(data))).second) {
      throw FormatError(r.path() + ": duplicate tensor '" + name + "'");
    }
  }
  if (r.remaining() != 0) {
    throw LengthError(r.path() + ": " + std::to_string(r.remaining()) + " trailing bytes after last tensor");
  }
  return model;
}

namespace {
std::string join_violations(const std::vector<Violation>& violations) {
  std::string msg;
  for (const auto& v : violations) msg += "\n  " + v.describe();
  return msg;
}
}  // namespace

VitModel read_model(const std::filesystem::path& path) {
  VitModel model = read_model_unchecked(path);
  const auto violations = validate_model(model);
  if (!violations.empty()) {
    throw ValidationError(path.string() + ": model failed validation:" + join_violations(violations));
  }
  return model;
}

void write_model(const VitModel& model, const std::filesystem::path& path) {
  if (model.tensors.empty()) throw ValidationError("refusing to write a model with no tensors");
  const auto violations = validate_model(model);
  if (!violations.empty()) throw ValidationError("refusing to write invalid model:" + join_violations(violations));

  std::string buf(kMagic, 4);
  put_le<std::uint32_t>(buf, kVwtfVersion);
  const std::string header = encode_config_header(model.config);
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(header.size()));
  buf += header;
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(model.tensors.size()));
  for (const auto& [name, tensor] : model.tensors) {  // std::map iterates in name order
    put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(name.size()));
    buf += name;
    put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(tensor.rank()));
    for (auto d : tensor.shape()) put_le<std::uint64_t>(buf, d);
    for (float v : tensor.data()) put_le<std::uint32_t>(buf, std::bit_cast<std::uint32_t>(v));
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace vitnt
