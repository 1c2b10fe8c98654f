#include "pgds/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pgds {

namespace {

using nlohmann::json;

constexpr int kChainFormatVersion = 1;

std::string format_real(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  return out;
}

}  // namespace

DatasetBundle load_counts(const std::string& path) {
  std::ifstream in = open_input(path);
  DatasetBundle bundle;
  std::string line;
  int line_no = 0;
  int V = -1, T = -1;
  std::vector<CountEntry> triplets;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (!bundle.provenance.empty()) bundle.provenance += "\n";
      bundle.provenance += line.substr(1);
      continue;
    }
    std::istringstream ls(line);
    if (V < 0) {
      if (!(ls >> V >> T) || V < 1 || T < 1)
        throw ParseError(path + ":" + std::to_string(line_no) + ": malformed 'V T' header");
      std::string rest;
      if (ls >> rest)
        throw ParseError(path + ":" + std::to_string(line_no) + ": trailing tokens after header");
      continue;
    }
    int t, v;
    long long count;
    if (!(ls >> t >> v >> count))
      throw ParseError(path + ":" + std::to_string(line_no) + ": malformed 't v count' line");
    std::string rest;
    if (ls >> rest)
      throw ParseError(path + ":" + std::to_string(line_no) + ": trailing tokens");
    if (t < 1 || t > T || v < 1 || v > V)
      throw ParseError(path + ":" + std::to_string(line_no) + ": index out of range");
    if (count < 1)
      throw ParseError(path + ":" + std::to_string(line_no) + ": counts must be >= 1");
    triplets.push_back({v, t, count});
  }
  if (V < 0) throw ParseError(path + ": missing 'V T' header");

  bundle.counts = CountMatrix::from_triplets(V, T, std::move(triplets));
  bundle.feature_labels.resize(static_cast<std::size_t>(V));
  bundle.time_labels.resize(static_cast<std::size_t>(T));
  for (int v = 1; v <= V; ++v)
    bundle.feature_labels[static_cast<std::size_t>(v - 1)] = "f" + std::to_string(v);
  for (int t = 1; t <= T; ++t)
    bundle.time_labels[static_cast<std::size_t>(t - 1)] = "t" + std::to_string(t);
  return bundle;
}

void save_counts(const CountMatrix& counts, const std::string& path,
                 const std::string& provenance) {
  std::ofstream out = open_output(path);
  if (!provenance.empty()) {
    std::istringstream ps(provenance);
    std::string pl;
    while (std::getline(ps, pl)) out << "#" << pl << "\n";
  }
  out << counts.V() << " " << counts.T() << "\n";
  for (const auto& e : counts.entries()) out << e.t << " " << e.v << " " << e.count << "\n";
}

std::vector<std::string> load_labels(const std::string& path, int expected) {
  std::ifstream in = open_input(path);
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(in, line)) labels.push_back(line);
  while (!labels.empty() && labels.back().empty()) labels.pop_back();
  if (static_cast<int>(labels.size()) != expected)
    throw ParseError(path + ": expected " + std::to_string(expected) + " labels, found " +
                     std::to_string(labels.size()));
  return labels;
}

Mask load_mask(const std::string& path, int T) {
  std::ifstream in = open_input(path);
  Mask mask;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string kind;
    int t;
    if (!(ls >> kind >> t))
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected 'smooth t' or 'forecast t'");
    std::string rest;
    if (ls >> rest) throw ParseError(path + ":" + std::to_string(line_no) + ": trailing tokens");
    if (kind == "smooth")
      mask.smoothing.push_back(t);
    else if (kind == "forecast")
      mask.forecast.push_back(t);
    else
      throw ParseError(path + ":" + std::to_string(line_no) + ": unknown mask kind '" + kind + "'");
  }
  std::sort(mask.smoothing.begin(), mask.smoothing.end());
  std::sort(mask.forecast.begin(), mask.forecast.end());
  mask.validate(T);
  return mask;
}

void save_mask(const Mask& mask, const std::string& path) {
  std::ofstream out = open_output(path);
  for (int t : mask.smoothing) out << "smooth " << t << "\n";
  for (int t : mask.forecast) out << "forecast " << t << "\n";
}

namespace {

json matrix_to_json(const MatD& m) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["data"] = m.data();
  return j;
}

MatD matrix_from_json(const json& j) {
  MatD m(j.at("rows").get<int>(), j.at("cols").get<int>());
  m.data() = j.at("data").get<std::vector<double>>();
  if (m.data().size() != static_cast<std::size_t>(m.rows()) * static_cast<std::size_t>(m.cols()))
    throw ParseError("matrix payload size mismatch");
  return m;
}

json state_to_json(const ModelState& s) {
  json j;
  j["phi"] = matrix_to_json(s.phi);
  j["theta"] = matrix_to_json(s.theta);
  j["pi"] = matrix_to_json(s.pi);
  j["nu"] = s.nu;
  j["xi"] = s.xi;
  j["beta"] = s.beta;
  j["delta"] = s.delta;
  return j;
}

ModelState state_from_json(const json& j) {
  ModelState s;
  s.phi = matrix_from_json(j.at("phi"));
  s.theta = matrix_from_json(j.at("theta"));
  s.pi = matrix_from_json(j.at("pi"));
  s.nu = j.at("nu").get<std::vector<double>>();
  s.xi = j.at("xi").get<double>();
  s.beta = j.at("beta").get<double>();
  s.delta = j.at("delta").get<std::vector<double>>();
  return s;
}

}  // namespace

void save_chain(const SampleChain& chain, const std::string& path) {
  json j;
  j["format"] = "pgds-chain";
  j["version"] = kChainFormatVersion;
  j["fields"] = {"hyper", "schedule", "seed", "stream", "V", "T",
                 "samples", "log_joint_trace", "nu_accept_rate", "xi_accept_rate"};
  j["hyper"] = {{"tau0", chain.hyper.tau0},  {"gamma0", chain.hyper.gamma0},
                {"eta0", chain.hyper.eta0},  {"eps0", chain.hyper.eps0},
                {"K", chain.hyper.K},        {"stationary_delta", chain.hyper.stationary_delta},
                {"steady_state", chain.hyper.steady_state}};
  j["schedule"] = {{"iterations", chain.schedule.iterations},
                   {"burn_in", chain.schedule.burn_in},
                   {"thin", chain.schedule.thin}};
  j["seed"] = chain.seed;
  j["stream"] = chain.stream;
  j["V"] = chain.V;
  j["T"] = chain.T;
  j["log_joint_trace"] = chain.log_joint_trace;
  j["nu_accept_rate"] = chain.nu_accept_rate;
  j["xi_accept_rate"] = chain.xi_accept_rate;
  json samples = json::array();
  for (const auto& s : chain.samples) samples.push_back(state_to_json(s));
  j["samples"] = std::move(samples);

  std::ofstream out = open_output(path);
  out << j.dump(2) << "\n";
}

SampleChain load_chain(const std::string& path) {
  std::ifstream in = open_input(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path + ": not a valid chain file (" + e.what() + ")");
  }
  if (!j.contains("format") || j.at("format") != "pgds-chain")
    throw ParseError(path + ": not a pgds-chain file");
  if (j.at("version").get<int>() != kChainFormatVersion)
    throw ParseError(path + ": unsupported chain format version " +
                     j.at("version").dump() + " (expected " +
                     std::to_string(kChainFormatVersion) + ")");

  SampleChain chain;
  const json& h = j.at("hyper");
  chain.hyper.tau0 = h.at("tau0").get<double>();
  chain.hyper.gamma0 = h.at("gamma0").get<double>();
  chain.hyper.eta0 = h.at("eta0").get<double>();
  chain.hyper.eps0 = h.at("eps0").get<double>();
  chain.hyper.K = h.at("K").get<int>();
  chain.hyper.stationary_delta = h.at("stationary_delta").get<bool>();
  chain.hyper.steady_state = h.at("steady_state").get<bool>();
  const json& sch = j.at("schedule");
  chain.schedule.iterations = sch.at("iterations").get<int>();
  chain.schedule.burn_in = sch.at("burn_in").get<int>();
  chain.schedule.thin = sch.at("thin").get<int>();
  chain.seed = j.at("seed").get<std::uint64_t>();
  chain.stream = j.at("stream").get<std::uint64_t>();
  chain.V = j.at("V").get<int>();
  chain.T = j.at("T").get<int>();
  chain.log_joint_trace = j.at("log_joint_trace").get<std::vector<double>>();
  chain.nu_accept_rate = j.at("nu_accept_rate").get<double>();
  chain.xi_accept_rate = j.at("xi_accept_rate").get<double>();
  for (const auto& s : j.at("samples")) chain.samples.push_back(state_from_json(s));
  return chain;
}

void save_predictions(const std::vector<PredictionCell>& cells, const std::string& path) {
  std::ofstream out = open_output(path);
  out << "v t true pred task\n";
  for (const auto& c : cells)
    out << c.v << " " << c.t << " " << c.truth << " " << format_real(c.pred) << " " << c.task
        << "\n";
}

std::vector<PredictionCell> load_predictions(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || line != "v t true pred task")
    throw ParseError(path + ": missing prediction table header");
  std::vector<PredictionCell> cells;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    PredictionCell c;
    std::string task;
    if (!(ls >> c.v >> c.t >> c.truth >> c.pred >> task) || task.size() != 1 ||
        (task[0] != 'S' && task[0] != 'F'))
      throw ParseError(path + ":" + std::to_string(line_no) + ": malformed prediction row");
    std::string rest;
    if (ls >> rest) throw ParseError(path + ":" + std::to_string(line_no) + ": trailing tokens");
    c.task = task[0];
    cells.push_back(c);
  }
  return cells;
}

void RunConfig::validate() const {
  hyper.validate();
  schedule.validate();
}

namespace {

bool parse_bool(const std::string& value, const std::string& key, int line_no) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("line " + std::to_string(line_no) + ": " + key + " expects true/false");
}

double parse_real(const std::string& value, const std::string& key, int line_no) {
  try {
    std::size_t used = 0;
    const double x = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("line " + std::to_string(line_no) + ": " + key + " expects a real number");
  }
}

long long parse_int(const std::string& value, const std::string& key, int line_no) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("line " + std::to_string(line_no) + ": " + key + " expects an integer");
  }
}

}  // namespace

void apply_config_line(RunConfig& config, const std::string& line, int line_no) {
  std::string trimmed = line;
  while (!trimmed.empty() && (trimmed.back() == '\r' || trimmed.back() == ' ')) trimmed.pop_back();
  if (trimmed.empty() || trimmed[0] == '#') return;
  const auto eq = trimmed.find('=');
  if (eq == std::string::npos)
    throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
  const std::string key = trimmed.substr(0, eq);
  const std::string value = trimmed.substr(eq + 1);

  if (key == "tau0") config.hyper.tau0 = parse_real(value, key, line_no);
  else if (key == "gamma0") config.hyper.gamma0 = parse_real(value, key, line_no);
  else if (key == "eta0") config.hyper.eta0 = parse_real(value, key, line_no);
  else if (key == "eps0") config.hyper.eps0 = parse_real(value, key, line_no);
  else if (key == "K") config.hyper.K = static_cast<int>(parse_int(value, key, line_no));
  else if (key == "stationary") config.hyper.stationary_delta = parse_bool(value, key, line_no);
  else if (key == "steady_state") config.hyper.steady_state = parse_bool(value, key, line_no);
  else if (key == "iterations") config.schedule.iterations = static_cast<int>(parse_int(value, key, line_no));
  else if (key == "burn_in") config.schedule.burn_in = static_cast<int>(parse_int(value, key, line_no));
  else if (key == "thin") config.schedule.thin = static_cast<int>(parse_int(value, key, line_no));
  else if (key == "seed") config.seed = static_cast<std::uint64_t>(parse_int(value, key, line_no));
  else if (key == "data") config.data_path = value;
  else if (key == "masks") config.mask_path = value;
  else if (key == "output") config.output_path = value;
  else throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  RunConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) apply_config_line(config, line, ++line_no);
  return config;
}

}  // namespace pgds
