#include "fogran/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <utility>

namespace fogran {
namespace {

template <typename A, typename B>
bool same(const Eigen::DenseBase<A>& a, const Eigen::DenseBase<B>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.derived().array() == b.derived().array()).all();
}

void require_size(const Eigen::VectorXd& v, Index n, const char* field) {
  if (v.size() != n) {
    throw ScenarioError(field, "expected " + std::to_string(n) + " entries, got " + std::to_string(v.size()));
  }
}

void require_positive(const Eigen::VectorXd& v, const char* field) {
  for (Index i = 0; i < v.size(); ++i) {
    if (!(v(i) > 0.0) || !std::isfinite(v(i))) {
      throw ScenarioError(field, "entry " + std::to_string(i) + " must be finite and > 0");
    }
  }
}

void require_positive(double v, const char* field) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ScenarioError(field, "must be finite and > 0");
}

void require_range(const Range& r, const char* field, bool strictly_positive = true) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi) {
    throw std::invalid_argument(std::string(field) + ": range [lo, hi] must be finite with lo <= hi");
  }
  if (strictly_positive && !(r.lo > 0.0)) {
    throw std::invalid_argument(std::string(field) + ": range must be strictly positive");
  }
}

// One canonical draw per call regardless of the range width.
double draw(std::mt19937_64& rng, const Range& r) {
  const double u = std::generate_canonical<double, 53>(rng);
  return r.lo + (r.hi - r.lo) * u;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

template <typename Container>
std::string join(const Container& values) {
  std::string out;
  bool first = true;
  for (const auto& v : values) {
    if (!first) out += ' ';
    first = false;
    if constexpr (std::is_floating_point_v<std::decay_t<decltype(v)>>) {
      out += format_double(v);
    } else {
      out += std::to_string(v);
    }
  }
  return out;
}

std::vector<double> to_std(const Eigen::Ref<const Eigen::VectorXd>& v) { return {v.data(), v.data() + v.size()}; }

// --- parsing ---------------------------------------------------------------

using KeyValues = std::map<std::string, std::string, std::less<>>;

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto b = s.find_first_not_of(" \t", pos);
    if (b == std::string_view::npos) break;
    const auto e = s.find_first_of(" \t", b);
    out.push_back(s.substr(b, e == std::string_view::npos ? std::string_view::npos : e - b));
    pos = e == std::string_view::npos ? s.size() : e;
  }
  return out;
}

class Reader {
 public:
  explicit Reader(KeyValues kv) : kv_(std::move(kv)) {}

  const std::string& raw(const char* key) {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw ScenarioError(key, "missing key");
    used_.push_back(key);
    return it->second;
  }

  std::vector<double> doubles(const char* key) {
    std::vector<double> out;
    for (auto tok : tokens(raw(key))) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || p != tok.data() + tok.size()) {
        throw ScenarioError(key, "malformed number '" + std::string(tok) + "'");
      }
      out.push_back(v);
    }
    return out;
  }

  double scalar(const char* key) {
    auto v = doubles(key);
    if (v.size() != 1) throw ScenarioError(key, "expected a single value");
    return v.front();
  }

  std::vector<std::int64_t> integers(const char* key) {
    std::vector<std::int64_t> out;
    for (auto tok : tokens(raw(key))) {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || p != tok.data() + tok.size()) {
        throw ScenarioError(key, "malformed integer '" + std::string(tok) + "'");
      }
      out.push_back(v);
    }
    return out;
  }

  Index count(const char* key) {
    auto v = integers(key);
    if (v.size() != 1) throw ScenarioError(key, "expected a single value");
    if (v.front() < 0) throw ScenarioError(key, "must be non-negative");
    return static_cast<Index>(v.front());
  }

  std::uint64_t unsigned64(const char* key) {
    const auto& s = raw(key);
    auto t = trim(s);
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size()) throw ScenarioError(key, "malformed unsigned integer");
    return v;
  }

  Eigen::VectorXd vector(const char* key, Index expected) {
    auto v = doubles(key);
    Eigen::VectorXd out = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
    require_size(out, expected, key);
    return out;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : kv_) {
      if (std::find(used_.begin(), used_.end(), key) == used_.end()) {
        throw ScenarioError(key, "unknown key");
      }
    }
  }

 private:
  KeyValues kv_;
  std::vector<std::string> used_;
};

std::vector<Index> index_map(Reader& r, const char* key, Index expected) {
  auto raw = r.integers(key);
  if (static_cast<Index>(raw.size()) != expected) {
    throw ScenarioError(key, "expected " + std::to_string(expected) + " entries, got " + std::to_string(raw.size()));
  }
  return {raw.begin(), raw.end()};
}

}  // namespace

bool operator==(const Topology& a, const Topology& b) {
  return a.num_dus == b.num_dus && a.num_rus == b.num_rus && a.num_users == b.num_users &&
         a.ru_to_du == b.ru_to_du && a.user_to_ru == b.user_to_ru &&
         same(a.uplink_bandwidth_hz, b.uplink_bandwidth_hz) &&
         same(a.fronthaul_capacity_hz, b.fronthaul_capacity_hz) &&
         same(a.midhaul_capacity_hz, b.midhaul_capacity_hz) && same(a.fronthaul_se, b.fronthaul_se) &&
         same(a.midhaul_se, b.midhaul_se) && same(a.mecl_capacity_hz, b.mecl_capacity_hz) &&
         same(a.mech_capacity_hz, b.mech_capacity_hz) && a.cloud_capacity_hz == b.cloud_capacity_hz;
}

bool operator==(const TaskSet& a, const TaskSet& b) {
  return same(a.data_bits, b.data_bits) && same(a.cycles_per_bit, b.cycles_per_bit);
}

bool operator==(const Geometry& a, const Geometry& b) {
  return same(a.ru_positions_m, b.ru_positions_m) && same(a.user_positions_m, b.user_positions_m);
}

std::vector<Index> Topology::users_of_ru(Index i) const {
  std::vector<Index> out;
  for (Index k = 0; k < num_users; ++k) {
    if (user_to_ru[static_cast<std::size_t>(k)] == i) out.push_back(k);
  }
  return out;
}

std::vector<Index> Topology::users_of_du(Index j) const {
  std::vector<Index> out;
  for (Index k = 0; k < num_users; ++k) {
    if (du_of_user(k) == j) out.push_back(k);
  }
  return out;
}

void validate(const Topology& t) {
  if (t.num_dus <= 0) throw ScenarioError("num_dus", "must be > 0");
  if (t.num_rus <= 0) throw ScenarioError("num_rus", "must be > 0");
  if (t.num_users < 0) throw ScenarioError("num_users", "must be >= 0");

  if (static_cast<Index>(t.ru_to_du.size()) != t.num_rus) throw ScenarioError("ru_to_du", "expected num_rus entries");
  for (std::size_t i = 0; i < t.ru_to_du.size(); ++i) {
    if (t.ru_to_du[i] < 0 || t.ru_to_du[i] >= t.num_dus) {
      throw ScenarioError("ru_to_du", "RU " + std::to_string(i) + " references DU " + std::to_string(t.ru_to_du[i]) +
                                          " outside [0, " + std::to_string(t.num_dus) + ")");
    }
  }
  if (static_cast<Index>(t.user_to_ru.size()) != t.num_users) {
    throw ScenarioError("user_to_ru", "expected num_users entries");
  }
  for (std::size_t k = 0; k < t.user_to_ru.size(); ++k) {
    if (t.user_to_ru[k] < 0 || t.user_to_ru[k] >= t.num_rus) {
      throw ScenarioError("user_to_ru", "user " + std::to_string(k) + " references RU " +
                                            std::to_string(t.user_to_ru[k]) + " outside [0, " +
                                            std::to_string(t.num_rus) + ")");
    }
  }

  require_size(t.uplink_bandwidth_hz, t.num_rus, "uplink_bandwidth_hz");
  require_size(t.fronthaul_capacity_hz, t.num_rus, "fronthaul_capacity_hz");
  require_size(t.fronthaul_se, t.num_rus, "fronthaul_se_bits_per_hz");
  require_size(t.mecl_capacity_hz, t.num_rus, "mecl_capacity_hz");
  require_size(t.midhaul_capacity_hz, t.num_dus, "midhaul_capacity_hz");
  require_size(t.midhaul_se, t.num_dus, "midhaul_se_bits_per_hz");
  require_size(t.mech_capacity_hz, t.num_dus, "mech_capacity_hz");

  require_positive(t.uplink_bandwidth_hz, "uplink_bandwidth_hz");
  require_positive(t.fronthaul_capacity_hz, "fronthaul_capacity_hz");
  require_positive(t.fronthaul_se, "fronthaul_se_bits_per_hz");
  require_positive(t.mecl_capacity_hz, "mecl_capacity_hz");
  require_positive(t.midhaul_capacity_hz, "midhaul_capacity_hz");
  require_positive(t.midhaul_se, "midhaul_se_bits_per_hz");
  require_positive(t.mech_capacity_hz, "mech_capacity_hz");
  require_positive(t.cloud_capacity_hz, "cloud_capacity_hz");
}

void validate(const Topology& topology, const TaskSet& tasks) {
  validate(topology);
  require_size(tasks.data_bits, topology.num_users, "data_bits");
  require_size(tasks.cycles_per_bit, topology.num_users, "cycles_per_bit");
  require_positive(tasks.data_bits, "data_bits");
  require_positive(tasks.cycles_per_bit, "cycles_per_bit");
}

void validate(const Scenario& s) {
  validate(s.topology, s.tasks);
  if (s.geometry.ru_positions_m.cols() != s.topology.num_rus) {
    throw ScenarioError("ru_x_m", "expected num_rus positions");
  }
  if (s.geometry.user_positions_m.cols() != s.topology.num_users) {
    throw ScenarioError("user_x_m", "expected num_users positions");
  }
  if (!s.geometry.ru_positions_m.allFinite()) throw ScenarioError("ru_x_m", "positions must be finite");
  if (!s.geometry.user_positions_m.allFinite()) throw ScenarioError("user_x_m", "positions must be finite");
  if (s.radio.num_antennas <= 0) throw ScenarioError("num_antennas", "must be > 0");
  require_positive(s.radio.tx_power_w, "tx_power_w");
  require_positive(s.radio.noise_density_w_per_hz, "noise_density_w_per_hz");
  require_positive(s.radio.pathloss_exponent, "pathloss_exponent");
  if (!std::isfinite(s.radio.reference_loss_db)) throw ScenarioError("reference_loss_db", "must be finite");
}

Scenario generate_scenario(const ScenarioSpec& spec, std::uint64_t seed) {
  if (spec.num_dus <= 0) throw std::invalid_argument("num_dus must be > 0");
  if (spec.num_rus <= 0) throw std::invalid_argument("num_rus must be > 0");
  if (spec.num_users < 0) throw std::invalid_argument("num_users must be >= 0");
  if (!(spec.ru_spacing_m > 0.0)) throw std::invalid_argument("ru_spacing_m must be > 0");
  require_range(spec.fronthaul_capacity_hz, "fronthaul_capacity_hz");
  require_range(spec.midhaul_capacity_hz, "midhaul_capacity_hz");
  require_range(spec.mecl_capacity_hz, "mecl_capacity_hz");
  require_range(spec.mech_capacity_hz, "mech_capacity_hz");
  require_range(spec.data_bits, "data_bits");
  require_range(spec.cycles_per_bit, "cycles_per_bit");

  const Index I = spec.num_rus;
  const Index J = spec.num_dus;
  const Index K = spec.num_users;

  std::mt19937_64 rng(seed);
  Scenario s;
  s.radio = spec.radio;
  s.channel_seed = splitmix64(seed);

  Topology& t = s.topology;
  t.num_dus = J;
  t.num_rus = I;
  t.num_users = K;

  // RUs on a square grid; contiguous blocks of RUs share a DU.
  const Index cols = static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(I))));
  s.geometry.ru_positions_m.resize(2, I);
  t.ru_to_du.resize(static_cast<std::size_t>(I));
  for (Index i = 0; i < I; ++i) {
    s.geometry.ru_positions_m.col(i) << spec.ru_spacing_m * static_cast<double>(i % cols),
        spec.ru_spacing_m * static_cast<double>(i / cols);
    t.ru_to_du[static_cast<std::size_t>(i)] = i * J / I;
  }

  t.uplink_bandwidth_hz = Eigen::VectorXd::Constant(I, spec.uplink_bandwidth_hz);
  t.fronthaul_se = Eigen::VectorXd::Constant(I, spec.fronthaul_se);
  t.midhaul_se = Eigen::VectorXd::Constant(J, spec.midhaul_se);
  t.cloud_capacity_hz = spec.cloud_capacity_hz;

  t.fronthaul_capacity_hz.resize(I);
  t.mecl_capacity_hz.resize(I);
  for (Index i = 0; i < I; ++i) {
    t.fronthaul_capacity_hz(i) = draw(rng, spec.fronthaul_capacity_hz);
    t.mecl_capacity_hz(i) = draw(rng, spec.mecl_capacity_hz);
  }
  t.midhaul_capacity_hz.resize(J);
  t.mech_capacity_hz.resize(J);
  for (Index j = 0; j < J; ++j) {
    t.midhaul_capacity_hz(j) = draw(rng, spec.midhaul_capacity_hz);
    t.mech_capacity_hz(j) = draw(rng, spec.mech_capacity_hz);
  }

  const double radius = 0.5 * spec.ru_spacing_m;
  s.geometry.user_positions_m.resize(2, K);
  t.user_to_ru.resize(static_cast<std::size_t>(K));
  s.tasks.data_bits.resize(K);
  s.tasks.cycles_per_bit.resize(K);
  for (Index k = 0; k < K; ++k) {
    const double cell_draw = std::generate_canonical<double, 53>(rng);
    const Index home = std::min<Index>(static_cast<Index>(cell_draw * static_cast<double>(I)), I - 1);
    const double r = radius * std::sqrt(std::generate_canonical<double, 53>(rng));
    const double phi = 2.0 * std::numbers::pi * std::generate_canonical<double, 53>(rng);
    const Eigen::Vector2d pos = s.geometry.ru_positions_m.col(home) + r * Eigen::Vector2d(std::cos(phi), std::sin(phi));
    s.geometry.user_positions_m.col(k) = pos;

    Index nearest = 0;
    (s.geometry.ru_positions_m.colwise() - pos).colwise().squaredNorm().minCoeff(&nearest);
    t.user_to_ru[static_cast<std::size_t>(k)] = nearest;

    s.tasks.data_bits(k) = draw(rng, spec.data_bits);
    s.tasks.cycles_per_bit(k) = draw(rng, spec.cycles_per_bit);
  }

  validate(s);
  return s;
}

std::string format_scenario(const Scenario& s) {
  const Topology& t = s.topology;
  std::ostringstream out;
  out << "# fogran scenario v1\n";
  out << "num_dus = " << t.num_dus << '\n';
  out << "num_rus = " << t.num_rus << '\n';
  out << "num_users = " << t.num_users << '\n';
  out << "num_antennas = " << s.radio.num_antennas << '\n';
  out << "tx_power_w = " << format_double(s.radio.tx_power_w) << '\n';
  out << "noise_density_w_per_hz = " << format_double(s.radio.noise_density_w_per_hz) << '\n';
  out << "pathloss_exponent = " << format_double(s.radio.pathloss_exponent) << '\n';
  out << "reference_loss_db = " << format_double(s.radio.reference_loss_db) << '\n';
  out << "channel_seed = " << s.channel_seed << '\n';
  out << "ru_to_du = " << join(t.ru_to_du) << '\n';
  out << "user_to_ru = " << join(t.user_to_ru) << '\n';
  out << "ru_x_m = " << join(to_std(s.geometry.ru_positions_m.row(0).transpose())) << '\n';
  out << "ru_y_m = " << join(to_std(s.geometry.ru_positions_m.row(1).transpose())) << '\n';
  out << "user_x_m = " << join(to_std(s.geometry.user_positions_m.row(0).transpose())) << '\n';
  out << "user_y_m = " << join(to_std(s.geometry.user_positions_m.row(1).transpose())) << '\n';
  out << "uplink_bandwidth_hz = " << join(to_std(t.uplink_bandwidth_hz)) << '\n';
  out << "fronthaul_capacity_hz = " << join(to_std(t.fronthaul_capacity_hz)) << '\n';
  out << "fronthaul_se_bits_per_hz = " << join(to_std(t.fronthaul_se)) << '\n';
  out << "mecl_capacity_hz = " << join(to_std(t.mecl_capacity_hz)) << '\n';
  out << "midhaul_capacity_hz = " << join(to_std(t.midhaul_capacity_hz)) << '\n';
  out << "midhaul_se_bits_per_hz = " << join(to_std(t.midhaul_se)) << '\n';
  out << "mech_capacity_hz = " << join(to_std(t.mech_capacity_hz)) << '\n';
  out << "cloud_capacity_hz = " << format_double(t.cloud_capacity_hz) << '\n';
  out << "data_bits = " << join(to_std(s.tasks.data_bits)) << '\n';
  out << "cycles_per_bit = " << join(to_std(s.tasks.cycles_per_bit)) << '\n';
  return out.str();
}

Scenario parse_scenario(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto body = trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ScenarioError("line " + std::to_string(line_no), "expected 'key = value'");
    }
    std::string key(trim(body.substr(0, eq)));
    if (!kv.emplace(key, std::string(trim(body.substr(eq + 1)))).second) {
      throw ScenarioError(key, "duplicate key");
    }
  }

  Reader r(std::move(kv));
  Scenario s;
  Topology& t = s.topology;
  t.num_dus = r.count("num_dus");
  t.num_rus = r.count("num_rus");
  t.num_users = r.count("num_users");
  s.radio.num_antennas = r.count("num_antennas");
  s.radio.tx_power_w = r.scalar("tx_power_w");
  s.radio.noise_density_w_per_hz = r.scalar("noise_density_w_per_hz");
  s.radio.pathloss_exponent = r.scalar("pathloss_exponent");
  s.radio.reference_loss_db = r.scalar("reference_loss_db");
  s.channel_seed = r.unsigned64("channel_seed");

  t.ru_to_du = index_map(r, "ru_to_du", t.num_rus);
  t.user_to_ru = index_map(r, "user_to_ru", t.num_users);

  s.geometry.ru_positions_m.resize(2, t.num_rus);
  s.geometry.ru_positions_m.row(0) = r.vector("ru_x_m", t.num_rus).transpose();
  s.geometry.ru_positions_m.row(1) = r.vector("ru_y_m", t.num_rus).transpose();
  s.geometry.user_positions_m.resize(2, t.num_users);
  s.geometry.user_positions_m.row(0) = r.vector("user_x_m", t.num_users).transpose();
  s.geometry.user_positions_m.row(1) = r.vector("user_y_m", t.num_users).transpose();

  t.uplink_bandwidth_hz = r.vector("uplink_bandwidth_hz", t.num_rus);
  t.fronthaul_capacity_hz = r.vector("fronthaul_capacity_hz", t.num_rus);
  t.fronthaul_se = r.vector("fronthaul_se_bits_per_hz", t.num_rus);
  t.mecl_capacity_hz = r.vector("mecl_capacity_hz", t.num_rus);
  t.midhaul_capacity_hz = r.vector("midhaul_capacity_hz", t.num_dus);
  t.midhaul_se = r.vector("midhaul_se_bits_per_hz", t.num_dus);
  t.mech_capacity_hz = r.vector("mech_capacity_hz", t.num_dus);
  t.cloud_capacity_hz = r.scalar("cloud_capacity_hz");

  s.tasks.data_bits = r.vector("data_bits", t.num_users);
  s.tasks.cycles_per_bit = r.vector("cycles_per_bit", t.num_users);

  r.reject_unknown();
  validate(s);
  return s;
}

void save_scenario(const std::filesystem::path& path, const Scenario& scenario) {
  validate(scenario);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << format_scenario(scenario);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace fogran
