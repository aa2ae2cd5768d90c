#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "kfuks/quadrature.hpp"

namespace kfuks {

namespace {

constexpr char kMagic[4] = {'K', 'F', 'G', 'C'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 1469598103934665603ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

template <class T>
void append(std::string& buf, const T& v) {
  buf.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
bool take(const std::string& buf, std::size_t& pos, T& v) {
  if (pos + sizeof(T) > buf.size()) return false;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  pos += sizeof(T);
  return true;
}

}  // namespace

GramCache::GramCache(std::string dir) : dir_(std::move(dir)) {}

std::string GramCache::default_dir() {
  const char* env = std::getenv("KFUKS_CACHE_DIR");
  return env && *env ? std::string(env) : std::string("./.kfuks_cache");
}

std::string GramCache::key(const DomainSpec& domain, const MonomialBasis& basis, const QuadratureScheme& scheme) {
  const nlohmann::json j = {{"domain", domain.to_json()}, {"basis", basis.to_json()}, {"scheme", scheme.to_json()}};
  const std::string s = j.dump();
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(s.data(), s.size())));
  return hex;
}

std::string GramCache::path(const std::string& key) const { return dir_ + "/gram_" + key + ".bin"; }

std::optional<GramResult> GramCache::get(const std::string& key) const {
  std::ifstream in(path(key), std::ios::binary);
  if (!in) return std::nullopt;
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto corrupt = [&]() -> std::optional<GramResult> {
    warn("gram cache entry " + key + " is corrupt; recomputing");
    return std::nullopt;
  };
  if (buf.size() < 8 + sizeof(std::uint64_t)) return corrupt();
  const std::size_t body = buf.size() - sizeof(std::uint64_t);
  std::uint64_t stored = 0;
  std::memcpy(&stored, buf.data() + body, sizeof stored);
  if (stored != fnv1a(buf.data(), body)) return corrupt();
  if (std::memcmp(buf.data(), kMagic, 4) != 0) return corrupt();
  std::size_t pos = 4;
  std::uint32_t version = 0;
  std::uint64_t rows = 0;
  GramResult g;
  if (!take(buf, pos, version) || version != kVersion || !take(buf, pos, rows) || !take(buf, pos, g.error_estimate))
    return corrupt();
  if (pos + rows * rows * 2 * sizeof(double) != body) return corrupt();
  g.S.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(rows));
  for (Eigen::Index j = 0; j < g.S.cols(); ++j)
    for (Eigen::Index i = 0; i < g.S.rows(); ++i) {
      double re = 0.0, im = 0.0;
      take(buf, pos, re);
      take(buf, pos, im);
      g.S(i, j) = cplx(re, im);
    }
  g.cache_hit = true;
  return g;
}

void GramCache::put(const std::string& key, const GramResult& g) const {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) {
    warn("cannot create gram cache directory " + dir_ + ": " + ec.message());
    return;
  }
  std::string buf(kMagic, 4);
  append(buf, kVersion);
  append(buf, static_cast<std::uint64_t>(g.S.rows()));
  append(buf, g.error_estimate);
  for (Eigen::Index j = 0; j < g.S.cols(); ++j)
    for (Eigen::Index i = 0; i < g.S.rows(); ++i) {
      append(buf, g.S(i, j).real());
      append(buf, g.S(i, j).imag());
    }
  append(buf, fnv1a(buf.data(), buf.size()));
  const std::string tmp = path(key) + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      warn("cannot write gram cache entry " + tmp);
      return;
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  std::filesystem::rename(tmp, path(key), ec);
  if (ec) warn("cannot finalize gram cache entry: " + ec.message());
}

GramResult gram_matrix_cached(const DomainSpec& domain, const MonomialBasis& basis, const QuadratureScheme& scheme,
                              const GramCache* cache) {
  const bool cacheable = cache && scheme.kind != QuadratureScheme::Kind::Exact &&
                         !std::holds_alternative<DefiningDomain>(domain.kind());
  if (!cacheable) return gram_matrix(domain, basis, scheme);
  const std::string k = GramCache::key(domain, basis, scheme);
  if (auto hit = cache->get(k)) return *hit;
  GramResult g = gram_matrix(domain, basis, scheme);
  cache->put(k, g);
  return g;
}

}  // namespace kfuks
