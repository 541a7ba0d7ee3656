#include "ham/config.hpp"

#include "ham/memory.hpp"

#include <sstream>

namespace ham {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

std::string to_string(Attention a) { return a == Attention::kHard ? "hard" : "soft"; }
std::string to_string(ModelMode m) { return m == ModelMode::kController ? "controller" : "raw"; }
std::string to_string(WriteQuery q) { return q == WriteQuery::kController ? "controller" : "root"; }
std::string to_string(RewardKind r) { return r == RewardKind::kLogProb ? "logprob" : "hamming"; }

Attention parse_attention(const std::string& s) {
  if (s == "hard") return Attention::kHard;
  if (s == "soft") return Attention::kSoft;
  throw ConfigError("attention must be hard or soft, got '" + s + "'");
}

ModelMode parse_mode(const std::string& s) {
  if (s == "controller") return ModelMode::kController;
  if (s == "raw") return ModelMode::kRaw;
  throw ConfigError("mode must be controller or raw, got '" + s + "'");
}

WriteQuery parse_write_query(const std::string& s) {
  if (s == "controller") return WriteQuery::kController;
  if (s == "root") return WriteQuery::kRoot;
  throw ConfigError("dham_write_query must be controller or root, got '" + s + "'");
}

RewardKind parse_reward(const std::string& s) {
  if (s == "logprob") return RewardKind::kLogProb;
  if (s == "hamming") return RewardKind::kHamming;
  throw ConfigError("reward must be logprob or hamming, got '" + s + "'");
}

void ModelConfig::validate() const {
  require(b >= 1, "b must be positive");
  require(b_in >= 1, "b_in must be positive");
  require(d >= 1 && l >= 1, "d and l must be positive");
  require(eta >= 1, "eta must be at least 1");
  require(is_power_of_two(n), "n must be a power of two, got " + std::to_string(n));
  require(mlp_hidden >= 1, "mlp_hidden must be positive");
  require(mlp_depth == 1 || mlp_depth == 2, "mlp_depth must be 1 or 2");
  require(!(mode == ModelMode::kRaw && eta != 1), "raw mode answers every operation (eta = 1)");
  require(!(attention == Attention::kSoft && dham_write_query == WriteQuery::kRoot &&
            d != query_width()),
          "dham_write_query=root needs d equal to the query width");
}

void TrainConfig::validate() const {
  require(gamma >= 0 && gamma <= 1, "gamma must lie in [0,1]");
  require(alpha0 >= 0, "alpha0 must be non-negative");
  require(alpha_decay > 0 && alpha_decay <= 1, "alpha_decay must lie in (0,1]");
  require(lr0 >= 0, "lr0 must be non-negative");
  require(lr_decay > 0 && lr_decay <= 1, "lr_decay must lie in (0,1]");
  require(batch_size >= 1 && batches_per_epoch >= 1 && epochs >= 0, "batch sizes must be positive");
  require(clip_norm > 0, "clip_norm must be positive");
  require(curriculum_threshold > 0 && curriculum_threshold < 1,
          "curriculum_threshold must lie in (0,1)");
  require(is_power_of_two(curriculum_start), "curriculum_start must be a power of two");
  require(baseline_weight >= 0, "baseline_weight must be non-negative");
  require(validation_batches >= 1, "validation_batches must be positive");
}

void RunConfig::validate() const {
  model.validate();
  train.validate();
  require(threads >= 1, "threads must be positive");
  require(checkpoint_every >= 1, "checkpoint_every must be positive");
  require(train.curriculum_start <= model.n, "curriculum_start exceeds n");
  const auto shape = tasks::task_shape(task, data_bits);
  require(model.b == shape.output_bits && model.b_in == shape.input_width,
          "model widths do not match task " + tasks::to_string(task));
  require((model.mode == ModelMode::kRaw) == tasks::is_data_structure(task),
          "task " + tasks::to_string(task) + " needs mode " +
              (tasks::is_data_structure(task) ? "raw" : "controller"));
  require(model.n >= tasks::min_length(task), "n too small for task " + tasks::to_string(task));
}

ModelConfig model_config_for(tasks::TaskId task, int data_bits, ModelConfig base) {
  const auto shape = tasks::task_shape(task, data_bits);
  base.b = shape.output_bits;
  base.b_in = shape.input_width;
  base.mode = tasks::is_data_structure(task) ? ModelMode::kRaw : ModelMode::kController;
  if (task == tasks::TaskId::kSearch) base.eta = 2;
  if (base.mode == ModelMode::kRaw) base.eta = 1;
  return base;
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = {{"b", c.b},
       {"b_in", c.b_in},
       {"d", c.d},
       {"l", c.l},
       {"eta", c.eta},
       {"n", c.n},
       {"mlp_hidden", c.mlp_hidden},
       {"mlp_depth", c.mlp_depth},
       {"attention", to_string(c.attention)},
       {"mode", to_string(c.mode)},
       {"dham_write_query", to_string(c.dham_write_query)}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  c.b = j.at("b").get<int>();
  c.b_in = j.at("b_in").get<int>();
  c.d = j.at("d").get<int>();
  c.l = j.at("l").get<int>();
  c.eta = j.at("eta").get<int>();
  c.n = j.at("n").get<int>();
  c.mlp_hidden = j.at("mlp_hidden").get<int>();
  c.mlp_depth = j.at("mlp_depth").get<int>();
  c.attention = parse_attention(j.at("attention").get<std::string>());
  c.mode = parse_mode(j.at("mode").get<std::string>());
  c.dham_write_query = parse_write_query(j.at("dham_write_query").get<std::string>());
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"gamma", c.gamma},
       {"alpha0", c.alpha0},
       {"alpha_decay", c.alpha_decay},
       {"lr0", c.lr0},
       {"lr_decay", c.lr_decay},
       {"batch_size", c.batch_size},
       {"batches_per_epoch", c.batches_per_epoch},
       {"epochs", c.epochs},
       {"clip_norm", c.clip_norm},
       {"curriculum_threshold", c.curriculum_threshold},
       {"curriculum_start", c.curriculum_start},
       {"reward", to_string(c.reward_kind)},
       {"normalize_reward", c.normalize_reward},
       {"baseline_weight", c.baseline_weight},
       {"validation_batches", c.validation_batches}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  c.gamma = j.at("gamma").get<double>();
  c.alpha0 = j.at("alpha0").get<double>();
  c.alpha_decay = j.at("alpha_decay").get<double>();
  c.lr0 = j.at("lr0").get<double>();
  c.lr_decay = j.at("lr_decay").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.batches_per_epoch = j.at("batches_per_epoch").get<int>();
  c.epochs = j.at("epochs").get<int>();
  c.clip_norm = j.at("clip_norm").get<double>();
  c.curriculum_threshold = j.at("curriculum_threshold").get<double>();
  c.curriculum_start = j.at("curriculum_start").get<int>();
  c.reward_kind = parse_reward(j.at("reward").get<std::string>());
  c.normalize_reward = j.at("normalize_reward").get<bool>();
  c.baseline_weight = j.at("baseline_weight").get<double>();
  c.validation_batches = j.at("validation_batches").get<int>();
}

void to_json(nlohmann::json& j, const RunConfig& c) {
  j = {{"task", tasks::to_string(c.task)},
       {"data_bits", c.data_bits},
       {"model", c.model},
       {"train", c.train},
       {"seed", c.seed},
       {"threads", c.threads},
       {"checkpoint_every", c.checkpoint_every}};
}

void from_json(const nlohmann::json& j, RunConfig& c) {
  c.task = tasks::parse_task(j.at("task").get<std::string>());
  c.data_bits = j.at("data_bits").get<int>();
  c.model = j.at("model").get<ModelConfig>();
  c.train = j.at("train").get<TrainConfig>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.threads = j.at("threads").get<int>();
  c.checkpoint_every = j.at("checkpoint_every").get<int>();
}

std::string to_key_values(const RunConfig& c) {
  const nlohmann::json j = c;
  std::ostringstream out;
  auto emit = [&out](const std::string& key, const nlohmann::json& v) {
    out << key << " = " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
  };
  for (const char* key : {"task", "data_bits", "seed", "threads", "checkpoint_every"}) emit(key, j.at(key));
  for (const auto& [key, v] : j.at("model").items()) emit(key, v);
  for (const auto& [key, v] : j.at("train").items()) emit(key, v);
  return out.str();
}

void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  nlohmann::json j = c;
  nlohmann::json* slot = nullptr;
  if (j.contains(key) && !j.at(key).is_object()) {
    slot = &j[key];
  } else if (j.at("model").contains(key)) {
    slot = &j["model"][key];
  } else if (j.at("train").contains(key)) {
    slot = &j["train"][key];
  } else {
    throw ConfigError("unknown setting '" + key + "'");
  }
  try {
    if (slot->is_string()) {
      *slot = value;
    } else if (slot->is_boolean()) {
      require(value == "true" || value == "false", "setting '" + key + "' must be true or false");
      *slot = value == "true";
    } else {
      const auto parsed = nlohmann::json::parse(value);
      require(parsed.is_number(), "setting '" + key + "' must be a number");
      if (slot->is_number_integer() || slot->is_number_unsigned()) {
        require(parsed.is_number_integer() || parsed.is_number_unsigned(),
                "setting '" + key + "' must be an integer");
      }
      *slot = parsed;
    }
    c = j.get<RunConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad value '" + value + "' for setting '" + key + "': " + e.what());
  }
}

void apply_key_values(RunConfig& c, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto trim = [](std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return std::string{};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, "line " + std::to_string(line_no) + ": expected key = value");
    apply_setting(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

}  // namespace ham
