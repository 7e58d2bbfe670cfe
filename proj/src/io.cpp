#include "pdeil/io.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace pdeil {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

json vec_to_json(const Vec& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vec vec_from_json(const json& arr) {
  Vec v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  return v;
}

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat mat_from_json(const json& rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.empty() ? 0 : rows[0].size());
  Mat m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) {
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
                    .get<double>();
    }
  }
  return m;
}

json gaussian_to_json(const GaussianModel& g) {
  return json{{"estimator", "gaussian"},
              {"mean", vec_to_json(g.mean)},
              {"covariance", mat_to_json(g.covariance)},
              {"ridge", g.ridge}};
}

GaussianModel gaussian_from_json(const json& j) {
  // covariance already includes the ridge; rebuild the factorization only
  GaussianModel g = make_gaussian(vec_from_json(j.at("mean")),
                                  mat_from_json(j.at("covariance")), 0.0);
  g.ridge = j.at("ridge").get<double>();
  return g;
}

json state_density_to_json(const StateDensity& model) {
  if (std::holds_alternative<GaussianModel>(model)) {
    return gaussian_to_json(std::get<GaussianModel>(model));
  }
  const KdeModel& k = std::get<KdeModel>(model);
  return json{{"estimator", "kde"},
              {"samples", mat_to_json(k.samples)},
              {"bandwidth", vec_to_json(k.bandwidth)},
              {"log_norm_const", k.log_norm_const}};
}

StateDensity state_density_from_json(const json& j) {
  const std::string kind = j.at("estimator").get<std::string>();
  if (kind == "gaussian") return gaussian_from_json(j);
  if (kind == "kde") {
    KdeModel k;
    k.samples = mat_from_json(j.at("samples"));
    k.bandwidth = vec_from_json(j.at("bandwidth"));
    k.log_norm_const = j.at("log_norm_const").get<double>();
    return k;
  }
  throw std::invalid_argument("unknown estimator kind: " + kind);
}

json conditional_to_json_obj(const ConditionalActionModel& m) {
  json classes = json::array();
  for (const GaussianModel& g : m.class_models) {
    classes.push_back(gaussian_to_json(g));
  }
  return json{{"estimator", "conditional"},
              {"labels", m.labels},
              {"log_priors", m.log_priors},
              {"classes", std::move(classes)}};
}

ConditionalActionModel conditional_from_json_obj(const json& j) {
  ConditionalActionModel m;
  m.labels = j.at("labels").get<std::vector<int>>();
  m.log_priors = j.at("log_priors").get<std::vector<double>>();
  for (const json& g : j.at("classes")) {
    m.class_models.push_back(gaussian_from_json(g));
  }
  return m;
}

}  // namespace

void write_demos(const std::filesystem::path& path, const DemoSet& demos) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  const json header{{"kind", "demos"},
                    {"env", env_name(demos.env)},
                    {"seed", demos.seed},
                    {"episodes", demos.episodes},
                    {"expert_return_mean", demos.expert_return_mean},
                    {"expert_return_min", demos.expert_return_min},
                    {"expert_return_max", demos.expert_return_max}};
  out << header.dump() << "\n";
  const bool discrete = discrete_actions(demos.env);
  for (std::size_t i = 0; i < demos.states.size(); ++i) {
    json rec;
    rec["s"] = demos.states[i].values;
    if (discrete) {
      rec["a"] = static_cast<long long>(std::llround(demos.actions[i].value));
    } else {
      rec["a"] = demos.actions[i].value;
    }
    out << rec.dump() << "\n";
  }
}

DemoSet read_demos(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("demo file is empty: " + path.string());
  }
  const json header = json::parse(line);
  DemoSet demos;
  demos.env = env_from_name(header.at("env").get<std::string>());
  demos.seed = header.at("seed").get<std::uint64_t>();
  demos.episodes = header.at("episodes").get<int>();
  demos.expert_return_mean = header.at("expert_return_mean").get<double>();
  demos.expert_return_min = header.at("expert_return_min").get<double>();
  demos.expert_return_max = header.at("expert_return_max").get<double>();
  const int dim = state_dim(demos.env);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json rec = json::parse(line);
    State s;
    s.values = rec.at("s").get<std::vector<double>>();
    if (static_cast<int>(s.values.size()) != dim) {
      throw std::runtime_error("demo record dimension mismatch");
    }
    demos.states.push_back(std::move(s));
    demos.actions.push_back(Action{rec.at("a").get<double>()});
  }
  if (demos.states.empty()) {
    throw std::runtime_error("demo file holds no records: " + path.string());
  }
  return demos;
}

std::string density_to_json(const StateDensity& model) {
  return state_density_to_json(model).dump();
}

StateDensity density_from_json(const std::string& text) {
  return state_density_from_json(json::parse(text));
}

std::string conditional_to_json(const ConditionalActionModel& model) {
  return conditional_to_json_obj(model).dump();
}

ConditionalActionModel conditional_from_json(const std::string& text) {
  return conditional_from_json_obj(json::parse(text));
}

std::string reward_model_to_json(const RewardModel& model) {
  json j{{"kind", "reward_model"},
         {"alpha", model.alpha},
         {"expert_state", state_density_to_json(model.expert_state)},
         {"agent_state", state_density_to_json(model.agent_state)}};
  if (model.expert_joint.has_value()) {
    j["expert_joint"] = state_density_to_json(*model.expert_joint);
  }
  if (model.expert_conditional.has_value()) {
    j["expert_conditional"] = conditional_to_json_obj(*model.expert_conditional);
  }
  return j.dump();
}

RewardModel reward_model_from_json(const std::string& text) {
  const json j = json::parse(text);
  const double alpha = j.at("alpha").get<double>();
  StateDensity expert_state = state_density_from_json(j.at("expert_state"));
  StateDensity agent_state = state_density_from_json(j.at("agent_state"));
  if (j.contains("expert_conditional")) {
    return make_reward_model(conditional_from_json_obj(j.at("expert_conditional")),
                             std::move(expert_state), std::move(agent_state),
                             alpha);
  }
  return make_reward_model(state_density_from_json(j.at("expert_joint")),
                           std::move(expert_state), std::move(agent_state),
                           alpha);
}

namespace {

json arch_to_json(const MlpArch& arch) {
  return json{{"input", arch.input}, {"hidden", arch.hidden},
              {"output", arch.output}};
}

MlpArch arch_from_json(const json& j) {
  MlpArch arch;
  arch.input = j.at("input").get<int>();
  arch.hidden = j.at("hidden").get<std::vector<int>>();
  arch.output = j.at("output").get<int>();
  return arch;
}

}  // namespace

void write_policy(const std::filesystem::path& path, const PolicyParams& p) {
  const json j{
      {"kind", "policy"},
      {"arch", arch_to_json(p.arch)},
      {"head",
       json{{"kind", p.head.kind == HeadKind::Categorical ? "categorical"
                                                          : "gaussian"},
            {"dim", p.head.dim},
            {"action_scale", p.head.action_scale}}},
      {"weights", p.w}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << j.dump() << "\n";
}

PolicyParams read_policy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json j;
  in >> j;
  PolicyParams p;
  p.arch = arch_from_json(j.at("arch"));
  const std::string kind = j.at("head").at("kind").get<std::string>();
  p.head.kind = kind == "categorical" ? HeadKind::Categorical : HeadKind::Gaussian;
  p.head.dim = j.at("head").at("dim").get<int>();
  p.head.action_scale = j.at("head").at("action_scale").get<double>();
  p.w = j.at("weights").get<std::vector<double>>();
  if (static_cast<int>(p.w.size()) != policy_weight_count(p.arch, p.head)) {
    throw std::runtime_error("policy checkpoint weight count mismatch");
  }
  return p;
}

void write_value(const std::filesystem::path& path, const ValueParams& v) {
  const json j{{"kind", "value"}, {"arch", arch_to_json(v.arch)},
               {"weights", v.w}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << j.dump() << "\n";
}

ValueParams read_value(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json j;
  in >> j;
  ValueParams v;
  v.arch = arch_from_json(j.at("arch"));
  v.w = j.at("weights").get<std::vector<double>>();
  if (static_cast<int>(v.w.size()) != mlp_weight_count(v.arch)) {
    throw std::runtime_error("value checkpoint weight count mismatch");
  }
  return v;
}

const char* MetricsWriter::header() {
  return "epoch,env_steps_total,eval_return_mean,"
         "recovered_vs_true_reward_correlation,misleading_clamp_events,alpha";
}

MetricsWriter::MetricsWriter(const std::filesystem::path& path) : out_(path) {
  if (!out_) throw std::runtime_error("cannot open " + path.string());
  out_ << header() << "\n";
  out_.flush();
}

void MetricsWriter::write_row(const MetricsRow& row) {
  out_ << row.epoch << ',' << row.env_steps_total << ','
       << fmt_double(row.eval_return_mean) << ',';
  if (row.reward_correlation.has_value()) {
    out_ << fmt_double(*row.reward_correlation);
  }
  out_ << ',' << row.misleading_clamp_events << ',' << fmt_double(row.alpha)
       << "\n";
  out_.flush();
}

std::vector<MetricsRow> read_metrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != MetricsWriter::header()) {
    throw std::runtime_error("bad metrics header in " + path.string());
  }
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    MetricsRow row;
    std::getline(ss, field, ',');
    row.epoch = std::stoi(field);
    std::getline(ss, field, ',');
    row.env_steps_total = std::stoll(field);
    std::getline(ss, field, ',');
    row.eval_return_mean = std::stod(field);
    std::getline(ss, field, ',');
    if (!field.empty()) row.reward_correlation = std::stod(field);
    std::getline(ss, field, ',');
    row.misleading_clamp_events = std::stoll(field);
    std::getline(ss, field, ',');
    row.alpha = std::stod(field);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace pdeil
