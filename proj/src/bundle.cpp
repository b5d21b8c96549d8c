#include "pursuit/bundle.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pursuit/config.hpp"
#include "pursuit/errors.hpp"

namespace pursuit {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Parses `key value...` lines into a map of whitespace-split tokens.
std::map<std::string, std::vector<std::string>> read_keyed_lines(const fs::path& path) {
  std::istringstream in(slurp(path));
  std::map<std::string, std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string key, token;
    if (!(fields >> key)) continue;
    std::vector<std::string> values;
    while (fields >> token) values.push_back(token);
    if (!out.emplace(key, std::move(values)).second) throw IoError(path.string() + ": repeated key " + key);
  }
  return out;
}

const std::vector<std::string>& field(const std::map<std::string, std::vector<std::string>>& fields,
                                      const std::string& key, const fs::path& path) {
  auto it = fields.find(key);
  if (it == fields.end()) throw IoError(path.string() + ": missing " + key);
  return it->second;
}

int single_int(const std::vector<std::string>& values, const fs::path& path) {
  if (values.size() != 1) throw IoError(path.string() + ": expected one integer");
  try {
    return static_cast<int>(parse_int(values[0]));
  } catch (const std::invalid_argument&) {
    throw IoError(path.string() + ": bad integer " + values[0]);
  }
}

std::vector<int> int_list(const std::vector<std::string>& values, const fs::path& path) {
  std::vector<int> out;
  for (const auto& v : values) out.push_back(single_int({v}, path));
  return out;
}

Eigen::VectorXd vector_of(const std::vector<std::string>& values, const fs::path& path) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    try {
      out(static_cast<Eigen::Index>(i)) = parse_double(values[i]);
    } catch (const std::invalid_argument&) {
      throw IoError(path.string() + ": bad number " + values[i]);
    }
  }
  return out;
}

void write_vector(std::ostream& out, const char* key, const Eigen::VectorXd& v) {
  out << key;
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << format_double(v(i));
  out << '\n';
}

void write_ints(std::ostream& out, const char* key, const std::vector<int>& v) {
  out << key;
  for (int x : v) out << ' ' << x;
  out << '\n';
}

}  // namespace

void save_generator(const fs::path& dir, const Generator& g) {
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "weights.mlp");
    save_mlp(out, g.net);
  }
  {
    auto out = open_out(dir / "spec.txt");
    out << "condition_dim " << g.spec.condition_dim << '\n'
        << "noise_dim " << g.spec.noise_dim << '\n'
        << "action_dim " << g.spec.action_dim << '\n';
    write_ints(out, "generator_hidden", g.spec.generator_hidden);
    write_ints(out, "discriminator_hidden", g.spec.discriminator_hidden);
    out << "hidden_activation " << activation_name(g.net.spec.hidden) << '\n'
        << "output_activation " << activation_name(g.net.spec.output) << '\n';
  }
  {
    auto out = open_out(dir / "standardization.txt");
    write_vector(out, "condition_mean", g.conditions.mean);
    write_vector(out, "condition_scale", g.conditions.scale);
    write_vector(out, "action_mean", g.actions.mean);
    write_vector(out, "action_scale", g.actions.scale);
  }
}

Generator load_generator(const fs::path& dir) {
  Generator g;
  const fs::path spec_path = dir / "spec.txt";
  const auto spec = read_keyed_lines(spec_path);
  g.spec.condition_dim = single_int(field(spec, "condition_dim", spec_path), spec_path);
  g.spec.noise_dim = single_int(field(spec, "noise_dim", spec_path), spec_path);
  g.spec.action_dim = single_int(field(spec, "action_dim", spec_path), spec_path);
  g.spec.generator_hidden = int_list(field(spec, "generator_hidden", spec_path), spec_path);
  g.spec.discriminator_hidden = int_list(field(spec, "discriminator_hidden", spec_path), spec_path);
  Activation hidden, output;
  try {
    g.spec.validate();
    hidden = activation_from_name(field(spec, "hidden_activation", spec_path).at(0));
    output = activation_from_name(field(spec, "output_activation", spec_path).at(0));
  } catch (const std::out_of_range&) {
    throw IoError(spec_path.string() + ": empty activation");
  } catch (const ValidationError& e) {
    throw IoError(spec_path.string() + ": " + e.what());
  }

  {
    std::istringstream weights(slurp(dir / "weights.mlp"));
    g.net = load_mlp<double>(weights, hidden, output);
  }
  if (g.net.spec.layer_sizes != g.spec.generator_mlp().layer_sizes)
    throw IoError((dir / "weights.mlp").string() + ": layer sizes disagree with spec.txt");

  const fs::path std_path = dir / "standardization.txt";
  const auto stdz = read_keyed_lines(std_path);
  g.conditions.mean = vector_of(field(stdz, "condition_mean", std_path), std_path);
  g.conditions.scale = vector_of(field(stdz, "condition_scale", std_path), std_path);
  g.actions.mean = vector_of(field(stdz, "action_mean", std_path), std_path);
  g.actions.scale = vector_of(field(stdz, "action_scale", std_path), std_path);
  if (g.conditions.mean.size() != g.spec.condition_dim || g.conditions.scale.size() != g.spec.condition_dim ||
      g.actions.mean.size() != g.spec.action_dim || g.actions.scale.size() != g.spec.action_dim)
    throw IoError(std_path.string() + ": widths disagree with spec.txt");
  return g;
}

std::string manifest_to_json(const Manifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["tool_version"] = m.tool_version;
  j["config_digest"] = m.config_digest;
  j["seeds"] = m.seeds;
  j["parameters"] = m.parameters;
  j["parents"] = m.parents;
  j["artifacts"] = m.artifacts;
  return j.dump(2) + "\n";
}

Manifest manifest_from_json(const std::string& text) {
  Manifest m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.command = j.at("command").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.config_digest = j.at("config_digest").get<std::string>();
    m.seeds = j.at("seeds").get<std::map<std::string, std::uint64_t>>();
    m.parameters = j.at("parameters").get<std::map<std::string, std::string>>();
    m.parents = j.at("parents").get<std::map<std::string, std::string>>();
    m.artifacts = j.at("artifacts").get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("manifest: ") + e.what());
  }
  return m;
}

void write_manifest(const fs::path& dir, Manifest m, const std::vector<std::string>& artifacts) {
  for (const auto& name : artifacts) m.artifacts[name] = file_digest(dir / name);
  auto out = open_out(dir / kManifestName);
  out << manifest_to_json(m);
  if (!out) throw IoError("cannot write " + (dir / kManifestName).string());
}

Manifest read_manifest(const fs::path& dir) { return manifest_from_json(slurp(dir / kManifestName)); }

const char* model_kind_name(ModelKind kind) { return kind == ModelKind::two_step ? "two-step" : "single-step"; }

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "two-step") return ModelKind::two_step;
  if (name == "single-step") return ModelKind::single_step;
  throw ConfigError("unknown model kind '" + name + "' (expected two-step or single-step)");
}

void save_model_generators(const fs::path& dir, const ModelBundle& bundle) {
  if (bundle.kind == ModelKind::two_step) {
    if (!bundle.g1 || !bundle.g2) throw ValidationError("two-step bundle needs g1 and g2");
    save_generator(dir / "g1", *bundle.g1);
    save_generator(dir / "g2", *bundle.g2);
  } else {
    if (!bundle.single) throw ValidationError("single-step bundle needs a generator");
    save_generator(dir / "single", *bundle.single);
  }
}

ModelBundle load_model_bundle(const fs::path& dir) {
  ModelBundle b;
  b.manifest = read_manifest(dir);
  auto param = [&](const std::string& key) {
    auto it = b.manifest.parameters.find(key);
    if (it == b.manifest.parameters.end()) throw IoError(dir.string() + ": manifest lacks parameter " + key);
    return it->second;
  };
  try {
    b.kind = model_kind_from_name(param("model"));
  } catch (const ConfigError& e) {
    throw IoError(dir.string() + ": " + e.what());
  }
  try {
    if (b.kind == ModelKind::two_step) {
      b.s1_query = parse_double(param("s1_query"));
      b.s2_query = parse_double(param("s2_query"));
      b.g1 = std::make_shared<const Generator>(load_generator(dir / "g1"));
      b.g2 = std::make_shared<const Generator>(load_generator(dir / "g2"));
    } else {
      b.s1_query = parse_double(param("query_score"));
      b.single = std::make_shared<const Generator>(load_generator(dir / "single"));
    }
  } catch (const std::invalid_argument&) {
    throw IoError(dir.string() + ": malformed query score in manifest");
  }
  return b;
}

}  // namespace pursuit
