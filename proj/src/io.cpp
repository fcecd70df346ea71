#include "lecam/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace lecam {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void atomic_write(const std::filesystem::path& file, const std::string& contents) {
  const std::filesystem::path tmp = file.parent_path() / (".tmp." + file.filename().string());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    }
    out << contents;
    if (!out.flush()) {
      throw std::runtime_error("short write to " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, file);
}

void write_path_csv(const std::filesystem::path& file, const GridPath& path) {
  path.validate();
  std::string out = "time,value\n";
  for (std::size_t k = 0; k < path.size(); ++k) {
    out += format_double(path.times[k]);
    out += ',';
    out += format_double(path.values[k]);
    out += '\n';
  }
  atomic_write(file, out);
}

GridPath read_path_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw std::runtime_error("cannot open " + file.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("empty path file: " + file.string());
  }
  GridPath path;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::invalid_argument("malformed CSV row '" + line + "' in " + file.string());
    }
    try {
      path.times.push_back(std::stod(line.substr(0, comma)));
      path.values.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed CSV row '" + line + "' in " + file.string());
    }
  }
  if (path.times.empty()) {
    throw std::invalid_argument("empty path file: " + file.string());
  }
  path.validate();
  return path;
}

void write_clock_csv(const std::filesystem::path& file, const TimeChangeMap& map) {
  std::string out = "t,u\n";
  for (std::size_t k = 0; k < map.t_grid().size(); ++k) {
    out += format_double(map.t_grid()[k]);
    out += ',';
    out += format_double(map.u_grid()[k]);
    out += '\n';
  }
  atomic_write(file, out);
}

void write_records_csv(const std::filesystem::path& file,
                       const std::vector<RateScanRecord>& records) {
  std::string out = "quantity,n,h,nh2,estimate,stderr,bound,bound_type,seed\n";
  for (const RateScanRecord& r : records) {
    out += r.quantity;
    out += ',';
    out += std::to_string(r.n);
    out += ',';
    out += format_double(r.h);
    out += ',';
    out += format_double(r.nh2);
    out += ',';
    out += format_double(r.estimate);
    out += ',';
    out += format_double(r.std_error);
    out += ',';
    out += format_double(r.bound);
    out += ',';
    out += r.bound_type;
    out += ',';
    out += std::to_string(r.seed);
    out += '\n';
  }
  atomic_write(file, out);
}

void require_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                  const std::string& where) {
  if (!j.is_object()) {
    throw ConfigError(where + " must be a JSON object");
  }
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

namespace {

const nlohmann::json& need(const nlohmann::json& j, const char* key,
                           const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) {
    throw ConfigError("missing key '" + std::string(key) + "' in " + where);
  }
  return *it;
}

double need_number(const nlohmann::json& j, const char* key, const std::string& where) {
  const nlohmann::json& v = need(j, key, where);
  if (!v.is_number()) {
    throw ConfigError("key '" + std::string(key) + "' in " + where + " must be a number");
  }
  return v.get<double>();
}

std::string need_string(const nlohmann::json& j, const char* key,
                        const std::string& where) {
  const nlohmann::json& v = need(j, key, where);
  if (!v.is_string()) {
    throw ConfigError("key '" + std::string(key) + "' in " + where + " must be a string");
  }
  return v.get<std::string>();
}

void check_constant(const nlohmann::json& j, const char* key, double computed) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  const double given = it->get<double>();
  const double tol = 1e-9 * std::max(1.0, std::abs(computed));
  if (std::abs(given - computed) > tol) {
    throw ConfigError("certified constant '" + std::string(key) +
                      "' does not match the family value " + format_double(computed));
  }
}

}  // namespace

nlohmann::json model_to_json(const ModelSpec& model) {
  nlohmann::json params;
  params["drift"] = {{"scale", model.drift.scale}, {"rate", model.drift.rate}};
  params["diffusion"] = {{"base", model.diffusion.base}, {"amp", model.diffusion.amp}};
  nlohmann::json initial;
  if (model.initial.kind == InitialLaw::Kind::Point) {
    initial = {{"kind", "point"}, {"location", model.initial.location}};
  } else {
    initial = {{"kind", "gaussian"},
               {"location", model.initial.location},
               {"stddev", model.initial.stddev}};
  }
  params["initial"] = initial;
  return nlohmann::json{
      {"family",
       {{"drift", drift_family_name(model.drift.family)},
        {"diffusion", diffusion_family_name(model.diffusion.family)}}},
      {"params", params},
      {"K", model.drift_bound},
      {"K_sigma", model.sigma_reg_bound},
      {"sigma0_sq", model.sigma0_sq},
      {"sigma1_sq", model.sigma1_sq}};
}

ModelSpec model_from_json(const nlohmann::json& j) {
  require_keys(j, {"family", "params", "K", "K_sigma", "sigma0_sq", "sigma1_sq"}, "model");
  const nlohmann::json& family = need(j, "family", "model");
  require_keys(family, {"drift", "diffusion"}, "model.family");
  DriftSpec drift;
  DiffusionSpec diffusion;
  try {
    drift.family = drift_family_from_name(need_string(family, "drift", "model.family"));
    diffusion.family =
        diffusion_family_from_name(need_string(family, "diffusion", "model.family"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  const nlohmann::json& params = need(j, "params", "model");
  require_keys(params, {"drift", "diffusion", "initial"}, "model.params");
  if (const auto it = params.find("drift"); it != params.end()) {
    require_keys(*it, {"scale", "rate"}, "model.params.drift");
    if (it->contains("scale")) drift.scale = need_number(*it, "scale", "model.params.drift");
    if (it->contains("rate")) drift.rate = need_number(*it, "rate", "model.params.drift");
  }
  if (const auto it = params.find("diffusion"); it != params.end()) {
    require_keys(*it, {"base", "amp"}, "model.params.diffusion");
    if (it->contains("base"))
      diffusion.base = need_number(*it, "base", "model.params.diffusion");
    if (it->contains("amp"))
      diffusion.amp = need_number(*it, "amp", "model.params.diffusion");
  }
  InitialLaw initial = InitialLaw::point(0.0);
  if (const auto it = params.find("initial"); it != params.end()) {
    require_keys(*it, {"kind", "location", "stddev"}, "model.params.initial");
    const std::string kind = need_string(*it, "kind", "model.params.initial");
    if (kind == "point") {
      initial = InitialLaw::point(need_number(*it, "location", "model.params.initial"));
    } else if (kind == "gaussian") {
      initial = InitialLaw::gaussian(need_number(*it, "location", "model.params.initial"),
                                     need_number(*it, "stddev", "model.params.initial"));
    } else {
      throw ConfigError("unknown initial law kind '" + kind + "'");
    }
  }

  ModelSpec model;
  try {
    model = make_model(drift, diffusion, initial);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  check_constant(j, "K", model.drift_bound);
  check_constant(j, "K_sigma", model.sigma_reg_bound);
  check_constant(j, "sigma0_sq", model.sigma0_sq);
  check_constant(j, "sigma1_sq", model.sigma1_sq);
  return model;
}

nlohmann::json estimate_to_json(const MeanEstimate& e, double horizon) {
  return nlohmann::json{{"estimate", e.estimate},
                        {"stderr", e.std_error},
                        {"n_replicates", e.count},
                        {"horizon", horizon}};
}

std::string content_digest(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace lecam
