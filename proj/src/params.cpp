#include "ertte/params.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ertte/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace ertte::nn {

Parameter& ParamStore::create(const std::string& name, long rows, long cols) {
  if (index_.contains(name)) throw StateError("duplicate parameter '" + name + "'");
  params_.push_back(std::make_unique<Parameter>(name, rows, cols));
  index_.emplace(name, params_.size() - 1);
  return *params_.back();
}

Parameter& ParamStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw StateError("unknown parameter '" + name + "'");
  return *params_[it->second];
}

const Parameter& ParamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw StateError("unknown parameter '" + name + "'");
  return *params_[it->second];
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
  return n;
}

std::vector<Parameter*> ParamStore::all() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParamStore::all() const {
  std::vector<const Parameter*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

void ParamStore::init_normal(std::mt19937_64& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (auto& p : params_)
    for (long i = 0; i < p->value.size(); ++i) p->value(i) = dist(rng);
}

void ParamStore::zero_grads() {
  for (auto& p : params_) p->grad.setZero();
}

void ParamStore::copy_values_from(const ParamStore& other) {
  if (params_.size() != other.params_.size())
    throw StateError("parameter stores differ in size");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& src = *other.params_[i];
    auto& dst = *params_[i];
    if (dst.name != src.name || dst.value.rows() != src.value.rows() ||
        dst.value.cols() != src.value.cols())
      throw StateError("parameter stores differ in structure at '" + dst.name + "'");
    dst.value = src.value;
  }
}

bool ParamStore::same_values(const ParamStore& other) const {
  if (params_.size() != other.params_.size()) return false;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i]->name != other.params_[i]->name) return false;
    if (params_[i]->value != other.params_[i]->value) return false;
  }
  return true;
}

void AdamOptimizer::step(ParamStore& store) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (Parameter* p : store.all()) {
    auto [it, inserted] = moments_.try_emplace(p->name);
    if (inserted) {
      it->second.m = Mat::Zero(p->value.rows(), p->value.cols());
      it->second.v = Mat::Zero(p->value.rows(), p->value.cols());
    }
    Mat& m = it->second.m;
    Mat& v = it->second.v;
    m = beta1_ * m + (1.0 - beta1_) * p->grad;
    v = beta2_ * v + (1.0 - beta2_) * p->grad.cwiseProduct(p->grad);
    p->value.array() -=
        lr_ * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps_);
  }
  store.zero_grads();
}

void AdamOptimizer::reset() {
  t_ = 0;
  moments_.clear();
}

namespace {

constexpr char kMagic[8] = {'E', 'R', 'T', 'C', 'K', 'P', '0', '1'};

template <typename T>
void write_raw(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in, const std::string& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw DataError("truncated checkpoint '" + path + "'");
  return v;
}

}  // namespace

std::string content_hash(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void save_checkpoint(const ParamStore& store, const std::string& path,
                     const std::string& config_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out.write(kMagic, sizeof(kMagic));
  write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(store.size()));
  nlohmann::json manifest;
  manifest["config_hash"] = config_hash;
  manifest["params"] = nlohmann::json::object();
  for (const Parameter* p : store.all()) {
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(p->value.rows()));
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(p->value.cols()));
    for (long i = 0; i < p->value.rows(); ++i)
      for (long j = 0; j < p->value.cols(); ++j) {
        const auto f = static_cast<float>(p->value(i, j));
        write_raw(out, f);
      }
    manifest["params"][p->name] = {p->value.rows(), p->value.cols()};
  }
  if (!out) throw DataError("write failed for '" + path + "'");
  std::ofstream mout(path + ".manifest.json");
  if (!mout) throw DataError("cannot open '" + path + ".manifest.json' for writing");
  mout << manifest.dump(2) << '\n';
}

void load_checkpoint(ParamStore& store, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path + "'");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(magic, magic + 8, kMagic))
    throw DataError("'" + path + "' is not a checkpoint archive");
  const auto count = read_raw<std::uint32_t>(in, path);
  if (count != store.size())
    throw DataError("checkpoint '" + path + "' holds " + std::to_string(count) +
                    " parameters, expected " + std::to_string(store.size()));
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto name_len = read_raw<std::uint32_t>(in, path);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto rows = read_raw<std::uint32_t>(in, path);
    const auto cols = read_raw<std::uint32_t>(in, path);
    if (!store.has(name)) throw DataError("checkpoint parameter '" + name + "' is unknown");
    Parameter& p = store.get(name);
    if (p.value.rows() != rows || p.value.cols() != cols)
      throw DataError("checkpoint parameter '" + name + "' has mismatched shape");
    for (std::uint32_t i = 0; i < rows; ++i)
      for (std::uint32_t j = 0; j < cols; ++j)
        p.value(i, j) = static_cast<double>(read_raw<float>(in, path));
  }
}

std::string checkpoint_config_hash(const std::string& path) {
  std::ifstream in(path + ".manifest.json");
  if (!in) throw DataError("missing manifest for checkpoint '" + path + "'");
  nlohmann::json manifest = nlohmann::json::parse(in, nullptr, true, true);
  return manifest.value("config_hash", "");
}

GradientCheckResult check_gradients(ParamStore& store,
                                    const std::function<NodeRef(Tape&)>& build,
                                    double step) {
  store.zero_grads();
  {
    Tape tape(true);
    NodeRef loss = build(tape);
    tape.backward(loss);
  }
  GradientCheckResult result;
  for (Parameter* p : store.all()) {
    for (long i = 0; i < p->value.size(); ++i) {
      const double saved = p->value(i);
      p->value(i) = saved + step;
      Tape tp(false);
      const double up = tp.scalar(build(tp));
      p->value(i) = saved - step;
      Tape tm(false);
      const double down = tm.scalar(build(tm));
      p->value(i) = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = p->grad(i);
      const double denom = std::max({std::abs(numeric), std::abs(analytic), 1.0});
      const double rel = std::abs(numeric - analytic) / denom;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_param = p->name;
      }
    }
  }
  return result;
}

}  // namespace ertte::nn
