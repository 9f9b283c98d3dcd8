#include "tbsd/config.hpp"

#include "tbsd/io.hpp"

#include <charconv>
#include <functional>
#include <sstream>

namespace tbsd {

namespace {

enum class Kind { integer, real, boolean, orthonormalization };

struct Field {
  const char* key;
  const char* help;
  Kind kind;
  std::function<void*(RunConfig&)> slot;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table{
      {"lambda", "smoothness penalty", Kind::real,
       [](RunConfig& c) -> void* { return &c.detection.lambda; }},
      {"gamma", "texture sparsity weight", Kind::real,
       [](RunConfig& c) -> void* { return &c.detection.gamma; }},
      {"eta", "anomaly sparsity weight", Kind::real,
       [](RunConfig& c) -> void* { return &c.detection.eta; }},
      {"iter_times", "block updates per run", Kind::integer,
       [](RunConfig& c) -> void* { return &c.detection.iter_times; }},
      {"phi_bt", "texture weight in the anomaly update", Kind::real,
       [](RunConfig& c) -> void* { return &c.detection.phi_bt; }},
      {"phi_a", "alarm threshold on the anomaly proportion", Kind::real,
       [](RunConfig& c) -> void* { return &c.detection.phi_a; }},
      {"binarize_eps", "anomaly magnitude counted as detected", Kind::real,
       [](RunConfig& c) -> void* { return &c.detection.binarize_eps; }},
      {"knots_x", "B-spline knots across columns (0 = auto)", Kind::integer,
       [](RunConfig& c) -> void* { return &c.learn.knots_x; }},
      {"knots_y", "B-spline knots across rows (0 = auto)", Kind::integer,
       [](RunConfig& c) -> void* { return &c.learn.knots_y; }},
      {"degree", "B-spline degree", Kind::integer,
       [](RunConfig& c) -> void* { return &c.learn.degree; }},
      {"line_count", "sampling lines per angle (0 = cover image)", Kind::integer,
       [](RunConfig& c) -> void* { return &c.learn.sampling.line_count; }},
      {"line_width", "samples averaged along a line", Kind::integer,
       [](RunConfig& c) -> void* { return &c.learn.sampling.line_width; }},
      {"center_gap", "offset between sampling lines", Kind::real,
       [](RunConfig& c) -> void* { return &c.learn.sampling.center_gap; }},
      {"max_rotate", "sampling angles over 180 degrees", Kind::integer,
       [](RunConfig& c) -> void* { return &c.learn.sampling.max_rotate; }},
      {"q", "direction threshold ratio", Kind::real,
       [](RunConfig& c) -> void* { return &c.learn.detect.q; }},
      {"invert_criterion", "flag the perpendicular of the high-spread angle", Kind::boolean,
       [](RunConfig& c) -> void* { return &c.learn.detect.invert_criterion; }},
      {"knbn_k", "pixels per texture cluster", Kind::integer,
       [](RunConfig& c) -> void* { return &c.learn.knbn_k; }},
      {"knbn_l", "neighbourhood reach of cluster growth", Kind::integer,
       [](RunConfig& c) -> void* { return &c.learn.knbn_l; }},
      {"patch_rows", "texture patch height", Kind::integer,
       [](RunConfig& c) -> void* { return &c.learn.patch_rows; }},
      {"patch_cols", "texture patch width", Kind::integer,
       [](RunConfig& c) -> void* { return &c.learn.patch_cols; }},
      {"dedup_cosine", "cosine above which patches are duplicates", Kind::real,
       [](RunConfig& c) -> void* { return &c.learn.basis.dedup_cosine; }},
      {"basis_method", "atom orthonormalization: principal or gram_schmidt",
       Kind::orthonormalization, [](RunConfig& c) -> void* { return &c.learn.basis.method; }},
      {"energy", "patch energy fraction kept by principal atoms", Kind::real,
       [](RunConfig& c) -> void* { return &c.learn.basis.energy; }},
      {"novelty_tol", "minimum new-norm fraction for a Gram-Schmidt atom", Kind::real,
       [](RunConfig& c) -> void* { return &c.learn.basis.novelty_tol; }},
      {"max_atoms", "atom cap (0 = none)", Kind::integer,
       [](RunConfig& c) -> void* { return &c.learn.basis.max_atoms; }},
      {"close_max_rotate", "angular sectors when closing regions", Kind::integer,
       [](RunConfig& c) -> void* { return &c.close_max_rotate; }},
      {"close_dmax", "cluster merge distance when closing regions", Kind::integer,
       [](RunConfig& c) -> void* { return &c.close_dmax; }},
  };
  return table;
}

const Field& find(const std::string& key) {
  for (const Field& f : fields())
    if (key == f.key) return f;
  throw InvalidArgument("unknown config key: " + key);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& raw) {
  const Field& f = find(key);
  const std::string value = trim(raw);
  const char* first = value.data();
  const char* last = value.data() + value.size();
  void* slot = f.slot(*this);
  switch (f.kind) {
    case Kind::integer: {
      int v = 0;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last || value.empty())
        throw InvalidArgument("config key " + key + " expects an integer, got '" + value + "'");
      *static_cast<int*>(slot) = v;
      break;
    }
    case Kind::real: {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last || value.empty())
        throw InvalidArgument("config key " + key + " expects a number, got '" + value + "'");
      *static_cast<double*>(slot) = v;
      break;
    }
    case Kind::boolean: {
      bool v;
      if (value == "true" || value == "1") v = true;
      else if (value == "false" || value == "0") v = false;
      else throw InvalidArgument("config key " + key + " expects true/false, got '" + value + "'");
      *static_cast<bool*>(slot) = v;
      break;
    }
    case Kind::orthonormalization:
      *static_cast<Orthonormalization*>(slot) = parse_orthonormalization(value);
      break;
  }
  learn.decompose.lambda = detection.lambda;
  learn.decompose.gamma = detection.gamma;
  learn.decompose.iter_times = detection.iter_times;
}

void RunConfig::load_text(const std::string& text) {
  if (const auto first = text.find_first_not_of(" \t\r\n");
      first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
    }
    for (const auto& [key, value] : j.items())
      set(key, value.is_string() ? value.get<std::string>() : value.dump());
    return;
  }
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument("config line " + std::to_string(number) + ": expected key = value");
    set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

void RunConfig::load_file(const std::filesystem::path& path) { load_text(io::read_text(path)); }

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  RunConfig copy = *this;
  for (const Field& f : fields()) {
    void* slot = f.slot(copy);
    switch (f.kind) {
      case Kind::integer: j[f.key] = *static_cast<int*>(slot); break;
      case Kind::real: j[f.key] = *static_cast<double*>(slot); break;
      case Kind::boolean: j[f.key] = *static_cast<bool*>(slot); break;
      case Kind::orthonormalization:
        j[f.key] = to_string(*static_cast<Orthonormalization*>(slot));
        break;
    }
  }
  return j;
}

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> out = [] {
    std::vector<std::string> k;
    for (const Field& f : fields()) k.emplace_back(f.key);
    return k;
  }();
  return out;
}

std::string RunConfig::help(const std::string& key) { return find(key).help; }

}  // namespace tbsd
