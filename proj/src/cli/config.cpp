#include "config.hpp"

#include <fstream>

#include "sqmz/errors.hpp"

namespace sqmz::cli {

std::string key_for_flag(std::string_view flag) {
  while (!flag.empty() && flag.front() == '-') {
    flag.remove_prefix(1);
  }
  std::string key(flag);
  for (char& ch : key) {
    if (ch == '-') {
      ch = '_';
    }
  }
  return key;
}

void ConfigBinder::apply_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ArgumentError("cannot read config file " + path.string());
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ArgumentError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) {
    throw ArgumentError("config file must hold a single flat JSON object");
  }
  for (const auto& [key, value] : doc.items()) {
    auto it = std::find_if(bindings_.begin(), bindings_.end(), [&](const Binding& b) { return b.key == key; });
    if (it == bindings_.end() || key == "config") {
      throw ArgumentError("unknown config key '" + key + "'");
    }
    if (it->option->count() > 0) {
      continue;
    }
    try {
      it->load(value);
    } catch (const json::exception& e) {
      throw ArgumentError("config key '" + key + "' has the wrong type: " + e.what());
    }
    it->from_file = true;
  }
}

bool ConfigBinder::provided(const std::string& flag) const {
  const std::string key = key_for_flag(flag);
  for (const auto& b : bindings_) {
    if (b.key == key) {
      return b.option->count() > 0 || b.from_file;
    }
  }
  return false;
}

json ConfigBinder::resolved() const {
  json out = json::object();
  for (const auto& b : bindings_) {
    if (b.key == "config" || environment_.count(b.key) > 0) {
      continue;
    }
    out[b.key] = b.dump();
  }
  return out;
}

}  // namespace sqmz::cli
