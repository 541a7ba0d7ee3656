#include "ham/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ham {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

namespace {

constexpr char kMagic[] = "HAMCKPT1\n";

void put_u64(std::ostream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); }

std::uint64_t get_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  if (!in) throw ConfigError("checkpoint truncated");
  return v;
}

void put_tensor(std::ostream& out, const std::string& name, const nn::Matrix& m) {
  put_u64(out, name.size());
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  put_u64(out, static_cast<std::uint64_t>(m.rows()));
  put_u64(out, static_cast<std::uint64_t>(m.cols()));
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(nn::Scalar)));
}

std::pair<std::string, nn::Matrix> get_tensor(std::istream& in) {
  const auto name_len = get_u64(in);
  if (name_len > 4096) throw ConfigError("checkpoint tensor name too long");
  std::string name(name_len, '\0');
  in.read(name.data(), static_cast<std::streamsize>(name_len));
  const auto rows = static_cast<Eigen::Index>(get_u64(in));
  const auto cols = static_cast<Eigen::Index>(get_u64(in));
  if (rows <= 0 || cols <= 0 || rows > (1 << 20) || cols > (1 << 20)) {
    throw ConfigError("checkpoint tensor '" + name + "' has a bad shape");
  }
  nn::Matrix m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(nn::Scalar)));
  if (!in) throw ConfigError("checkpoint truncated in tensor '" + name + "'");
  return {std::move(name), std::move(m)};
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const RunConfig& config,
                     const TrainerState& state) {
  const nlohmann::json header = {
      {"config", config},
      {"curriculum", {{"k", state.curriculum.k}, {"history", state.curriculum.history}}},
      {"next_epoch", state.next_epoch},
      {"best_error", state.best_error},
      {"best_capacity", state.best_capacity},
      {"param_seed", state.model.params().rng_seed()},
      {"adam",
       {{"step", state.adam.step_count},
        {"beta1", state.adam.beta1},
        {"beta2", state.adam.beta2},
        {"epsilon", state.adam.epsilon}}}};
  const std::string text = header.dump();

  std::ostringstream out;
  out.write(kMagic, sizeof(kMagic) - 1);
  put_u64(out, text.size());
  out << text;
  const auto& params = state.model.params();
  put_u64(out, params.size() + state.adam.first_moment.size() + state.adam.second_moment.size());
  for (const auto& [name, p] : params) put_tensor(out, name, p.value);
  for (const auto& [name, m] : state.adam.first_moment) put_tensor(out, "adam/m/" + name, m);
  for (const auto& [name, v] : state.adam.second_moment) put_tensor(out, "adam/v/" + name, v);

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
    if (!file) throw ConfigError("cannot write checkpoint " + tmp.string());
    const std::string bytes = out.str();
    file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!file) throw ConfigError("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint " + path.string());
  char magic[sizeof(kMagic) - 1];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw ConfigError(path.string() + " is not a checkpoint");
  }
  const auto len = get_u64(in);
  if (len > (1u << 24)) throw ConfigError("checkpoint header too large");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw ConfigError("checkpoint truncated in header");

  Checkpoint c;
  nn::ParameterStore loaded;
  try {
    const auto header = nlohmann::json::parse(text);
    c.config = header.at("config").get<RunConfig>();
    c.curriculum.k = header.at("curriculum").at("k").get<int>();
    c.curriculum.history = header.at("curriculum").at("history").get<std::vector<double>>();
    c.next_epoch = header.at("next_epoch").get<int>();
    c.best_error = header.at("best_error").get<double>();
    c.best_capacity = header.at("best_capacity").get<int>();
    loaded.set_rng_seed(header.at("param_seed").get<std::uint64_t>());
    const auto& adam = header.at("adam");
    c.adam.step_count = adam.at("step").get<std::int64_t>();
    c.adam.beta1 = adam.at("beta1").get<double>();
    c.adam.beta2 = adam.at("beta2").get<double>();
    c.adam.epsilon = adam.at("epsilon").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad checkpoint header: ") + e.what());
  }
  c.config.validate();

  const auto count = get_u64(in);
  for (std::uint64_t i = 0; i < count; ++i) {
    auto [name, m] = get_tensor(in);
    if (name.rfind("adam/m/", 0) == 0) {
      c.adam.first_moment[name.substr(7)] = std::move(m);
    } else if (name.rfind("adam/v/", 0) == 0) {
      c.adam.second_moment[name.substr(7)] = std::move(m);
    } else {
      loaded.add(name, m.rows(), m.cols()).value = std::move(m);
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) throw ConfigError("trailing bytes in checkpoint");

  // Validates names and shapes against the configuration.
  const Model model(c.config.model, loaded);
  c.params = model.params();
  for (const auto* moments : {&c.adam.first_moment, &c.adam.second_moment}) {
    for (const auto& [name, m] : *moments) {
      if (!c.params.contains(name) || c.params.at(name).value.rows() != m.rows() ||
          c.params.at(name).value.cols() != m.cols()) {
        throw ConfigError("checkpoint optimizer state does not match parameter '" + name + "'");
      }
    }
  }
  return c;
}

TrainerState restore_trainer_state(const Checkpoint& checkpoint) {
  TrainerState s{Model(checkpoint.config.model, checkpoint.params), checkpoint.adam,
                 checkpoint.curriculum, checkpoint.next_epoch, checkpoint.best_error,
                 checkpoint.best_capacity};
  s.model.set_capacity(checkpoint.curriculum.capacity());
  return s;
}

}  // namespace ham
