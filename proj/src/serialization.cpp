#include "trajpred/serialization.hpp"

#include "trajpred/error.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace trajpred {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

Eigen::VectorXd row_major(const Eigen::MatrixXd& m) {
  Eigen::VectorXd out(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i * m.cols() + j] = m(i, j);
  return out;
}

Eigen::MatrixXd from_row_major(const Eigen::VectorXd& v, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = v[i * cols + j];
  return m;
}

template <typename F>
auto malformed_on_error(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.category() != ErrorCategory::InvalidArgument) throw;
    fail(ErrorCategory::MalformedFile, what + ": " + e.what());
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  const std::string t = trim(text);
  double value = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, value);
  if (t.empty() || res.ec != std::errc() || res.ptr != last) {
    fail(ErrorCategory::MalformedFile, "not a number: '" + t + "'");
  }
  return value;
}

std::string format_vector(const Eigen::VectorXd& values) {
  std::string out;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (i) out += ' ';
    out += format_double(values[i]);
  }
  return out;
}

Eigen::VectorXd parse_vector(const std::string& text) {
  std::istringstream in(text);
  std::vector<double> values;
  std::string token;
  while (in >> token) values.push_back(parse_double(token));
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

KeyValueDocument KeyValueDocument::parse(const std::string& text) {
  KeyValueDocument doc;
  std::istringstream lines(text);
  std::string line;
  int number = 0;
  while (std::getline(lines, line)) {
    ++number;
    const std::string body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos || trim(body.substr(0, eq)).empty()) {
      fail(ErrorCategory::MalformedFile, "line " + std::to_string(number) + " is not 'key = value'");
    }
    const std::string key = trim(body.substr(0, eq));
    if (doc.has(key)) fail(ErrorCategory::MalformedFile, "duplicate key '" + key + "'");
    doc.entries_.emplace_back(key, trim(body.substr(eq + 1)));
  }
  return doc;
}

void KeyValueDocument::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

bool KeyValueDocument::has(const std::string& key) const {
  for (const auto& entry : entries_)
    if (entry.first == key) return true;
  return false;
}

const std::string& KeyValueDocument::get(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  fail(ErrorCategory::MalformedFile, "missing key '" + key + "'");
}

double KeyValueDocument::get_double(const std::string& key) const { return parse_double(get(key)); }

int KeyValueDocument::get_int(const std::string& key) const {
  const std::string& v = get(key);
  int value = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), value);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    fail(ErrorCategory::MalformedFile, "key '" + key + "' is not an integer: '" + v + "'");
  }
  return value;
}

Eigen::VectorXd KeyValueDocument::get_vector(const std::string& key, Eigen::Index expected) const {
  Eigen::VectorXd v = parse_vector(get(key));
  if (expected >= 0 && v.size() != expected) {
    fail(ErrorCategory::MalformedFile, "key '" + key + "' has " + std::to_string(v.size()) + " values, expected " +
                                           std::to_string(expected));
  }
  return v;
}

void KeyValueDocument::expect_schema(const std::string& format, int version) const {
  if (!has("format") || get("format") != format) {
    fail(ErrorCategory::SchemaMismatch, "expected a '" + format + "' document");
  }
  if (get_int("version") != version) {
    fail(ErrorCategory::SchemaMismatch, format + " version " + get("version") + " is not supported (expected " +
                                            std::to_string(version) + ")");
  }
}

std::string KeyValueDocument::to_string() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCategory::MissingArtifact, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) fail(ErrorCategory::Io, "cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) fail(ErrorCategory::Io, "cannot write " + path.string());
}

std::string mixture_to_text(const TrajectoryMixture& mix) {
  KeyValueDocument doc;
  doc.set("format", std::string("trajpred-mixture"));
  doc.set("version", kMixtureFormatVersion);
  doc.set("R", mix.size());
  doc.set("M", mix.features().size());
  doc.set("gamma", mix.features().gamma());
  doc.set("centers", mix.features().centers());
  doc.set("alpha", mix.weights());
  doc.set("origin", Eigen::VectorXd(mix.origin()));
  for (int r = 0; r < mix.size(); ++r) {
    const auto& c = mix.component(r);
    const std::string prefix = "component" + std::to_string(r) + ".";
    doc.set(prefix + "location", row_major(c.location()));
    doc.set(prefix + "row_scale", c.row_scale());
    doc.set(prefix + "col_scale", row_major(c.col_scale()));
  }
  return doc.to_string();
}

TrajectoryMixture mixture_from_text(const std::string& text) {
  const KeyValueDocument doc = KeyValueDocument::parse(text);
  doc.expect_schema("trajpred-mixture", kMixtureFormatVersion);
  return malformed_on_error("invalid mixture", [&] {
    const int r_count = doc.get_int("R");
    const int m = doc.get_int("M");
    require(r_count >= 1 && m >= 1, "R and M must be positive");
    RbfFeatureMap fmap(doc.get_vector("centers", m), doc.get_double("gamma"));
    std::vector<MatrixNormalComponent> comps;
    for (int r = 0; r < r_count; ++r) {
      const std::string prefix = "component" + std::to_string(r) + ".";
      comps.emplace_back(from_row_major(doc.get_vector(prefix + "location", 2 * m), m, 2),
                         doc.get_vector(prefix + "row_scale", m),
                         from_row_major(doc.get_vector(prefix + "col_scale", 4), 2, 2));
    }
    const Eigen::Vector2d origin = doc.get_vector("origin", 2);
    return TrajectoryMixture(doc.get_vector("alpha", r_count), std::move(comps), fmap, origin);
  });
}

void save_mixture(const TrajectoryMixture& mix, const std::filesystem::path& path) {
  write_text_file(path, mixture_to_text(mix));
}

TrajectoryMixture load_mixture(const std::filesystem::path& path) { return mixture_from_text(read_text_file(path)); }

std::string field_to_text(const HilbertField& field) {
  KeyValueDocument doc;
  doc.set("format", std::string("trajpred-field"));
  doc.set("version", kFieldFormatVersion);
  doc.set("gamma", field.gamma());
  doc.set("bias", field.bias());
  doc.set("lattice_x", field.lattice_x());
  doc.set("lattice_y", field.lattice_y());
  doc.set("weights", row_major(field.weight_grid()));
  return doc.to_string();
}

HilbertField field_from_text(const std::string& text) {
  const KeyValueDocument doc = KeyValueDocument::parse(text);
  doc.expect_schema("trajpred-field", kFieldFormatVersion);
  return malformed_on_error("invalid field", [&] {
    const Eigen::VectorXd xs = doc.get_vector("lattice_x");
    const Eigen::VectorXd ys = doc.get_vector("lattice_y");
    const Eigen::VectorXd w = doc.get_vector("weights", xs.size() * ys.size());
    return HilbertField(xs, ys, from_row_major(w, ys.size(), xs.size()), doc.get_double("bias"),
                        doc.get_double("gamma"));
  });
}

void write_mlp(KeyValueDocument& doc, const Mlp& net) {
  const std::vector<int> sizes = net.sizes();
  doc.set("layers", static_cast<int>(net.layers().size()));
  doc.set("sizes", Eigen::Map<const Eigen::VectorXi>(sizes.data(), static_cast<Eigen::Index>(sizes.size()))
                       .cast<double>()
                       .eval());
  for (size_t l = 0; l < net.layers().size(); ++l) {
    const std::string prefix = "layer" + std::to_string(l) + ".";
    doc.set(prefix + "weight", row_major(net.layers()[l].weight));
    doc.set(prefix + "bias", net.layers()[l].bias);
  }
}

Mlp read_mlp(const KeyValueDocument& doc) {
  const int count = doc.get_int("layers");
  if (count < 1) fail(ErrorCategory::MalformedFile, "network needs at least one layer");
  const Eigen::VectorXd sizes = doc.get_vector("sizes", count + 1);
  std::vector<DenseLayer> layers;
  for (int l = 0; l < count; ++l) {
    const auto in = static_cast<Eigen::Index>(sizes[l]);
    const auto out = static_cast<Eigen::Index>(sizes[l + 1]);
    if (in < 1 || out < 1) fail(ErrorCategory::MalformedFile, "layer sizes must be positive");
    const std::string prefix = "layer" + std::to_string(l) + ".";
    layers.push_back({from_row_major(doc.get_vector(prefix + "weight", in * out), out, in),
                      doc.get_vector(prefix + "bias", out)});
  }
  return Mlp(std::move(layers));
}

std::string mdn_to_text(const MdnNetwork& net) {
  KeyValueDocument doc;
  doc.set("format", std::string("trajpred-mdn"));
  doc.set("version", kCheckpointFormatVersion);
  doc.set("M", net.hyper.m);
  doc.set("R", net.hyper.r);
  doc.set("gamma", net.hyper.gamma);
  doc.set("horizon", net.hyper.horizon);
  doc.set("center_inputs", net.hyper.center_inputs ? 1 : 0);
  write_mlp(doc, net.net);
  return doc.to_string();
}

MdnNetwork mdn_from_text(const std::string& text) {
  const KeyValueDocument doc = KeyValueDocument::parse(text);
  doc.expect_schema("trajpred-mdn", kCheckpointFormatVersion);
  MdnHyper h;
  h.m = doc.get_int("M");
  h.r = doc.get_int("R");
  h.gamma = doc.get_double("gamma");
  h.horizon = doc.get_double("horizon");
  h.center_inputs = doc.get_int("center_inputs") != 0;
  return malformed_on_error("invalid network", [&] { return MdnNetwork(h, read_mlp(doc)); });
}

std::string naive_nn_to_text(const NaiveNnPredictor& model) {
  KeyValueDocument doc;
  doc.set("format", std::string("trajpred-naive-nn"));
  doc.set("version", kCheckpointFormatVersion);
  doc.set("horizon", model.horizon);
  write_mlp(doc, model.net);
  return doc.to_string();
}

NaiveNnPredictor naive_nn_from_text(const std::string& text) {
  const KeyValueDocument doc = KeyValueDocument::parse(text);
  doc.expect_schema("trajpred-naive-nn", kCheckpointFormatVersion);
  NaiveNnPredictor model{read_mlp(doc), doc.get_int("horizon")};
  if (model.net.input_size() != kEncodingSize || model.net.output_size() != 2 * model.horizon) {
    fail(ErrorCategory::MalformedFile, "naive network shape does not match its horizon");
  }
  return model;
}

std::vector<std::pair<std::string, TimedPath>> parse_paths_csv(const std::string& text) {
  std::istringstream lines(text);
  std::string line;
  if (!std::getline(lines, line) || split(trim(line), ',') != std::vector<std::string>{"id", "t", "x", "y"}) {
    fail(ErrorCategory::MalformedFile, "trajectory CSV must start with the header id,t,x,y");
  }
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::array<double, 3>>> rows;
  int number = 1;
  while (std::getline(lines, line)) {
    ++number;
    if (trim(line).empty()) continue;
    const auto cells = split(trim(line), ',');
    if (cells.size() != 4 || cells[0].empty()) {
      fail(ErrorCategory::MalformedFile, "trajectory CSV line " + std::to_string(number) + " needs 4 fields");
    }
    auto [it, inserted] = rows.try_emplace(cells[0]);
    if (inserted) order.push_back(cells[0]);
    it->second.push_back({parse_double(cells[1]), parse_double(cells[2]), parse_double(cells[3])});
  }
  std::vector<std::pair<std::string, TimedPath>> out;
  for (const auto& id : order) {
    const auto& samples = rows[id];
    Eigen::VectorXd t(static_cast<Eigen::Index>(samples.size()));
    MatrixX2d xy(t.size(), 2);
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      t[i] = samples[static_cast<size_t>(i)][0];
      xy(i, 0) = samples[static_cast<size_t>(i)][1];
      xy(i, 1) = samples[static_cast<size_t>(i)][2];
    }
    out.emplace_back(id, malformed_on_error("trajectory '" + id + "'", [&] { return TimedPath(t, xy); }));
  }
  return out;
}

std::string paths_to_csv(const std::vector<std::pair<std::string, TimedPath>>& paths) {
  std::string out = "id,t,x,y\n";
  for (const auto& [id, path] : paths) {
    for (Eigen::Index i = 0; i < path.size(); ++i) {
      out += id + "," + format_double(path.times[i]) + "," + format_double(path.points(i, 0)) + "," +
             format_double(path.points(i, 1)) + "\n";
    }
  }
  return out;
}

}  // namespace trajpred
