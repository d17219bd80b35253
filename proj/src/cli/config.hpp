#pragma once

// Flag <-> config-file binding. Flags are kebab-case, config keys are the
// snake_case spelling of the same name. Precedence: flag > config file > default.

#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace sqmz::cli {

using json = nlohmann::json;

/// "--beta-range" -> "beta_range".
std::string key_for_flag(std::string_view flag);

class ConfigBinder {
 public:
  explicit ConfigBinder(CLI::App& app) : app_(app) {}

  template <typename T>
  CLI::Option* option(const std::string& flag, T& field, const std::string& help) {
    CLI::Option* opt = app_.add_option(flag, field, help);
    if constexpr (!is_optional<T>::value) {
      opt->capture_default_str();
    }
    remember(flag, opt, field);
    return opt;
  }

  CLI::Option* flag(const std::string& flag, bool& field, const std::string& help) {
    CLI::Option* opt = app_.add_flag(flag, field, help);
    remember(flag, opt, field);
    return opt;
  }

  /// Keys that are accepted in a config file but left out of the resolved config.
  void mark_environment(const std::string& flag) { environment_.insert(key_for_flag(flag)); }

  /// Loads a flat JSON object and applies every key whose flag was not given.
  void apply_config_file(const std::filesystem::path& path);

  /// True if the value for `flag` came from the command line or the config file.
  bool provided(const std::string& flag) const;

  /// Resolved experiment configuration, keyed by snake_case name.
  json resolved() const;

 private:
  template <typename T>
  struct is_optional : std::false_type {};
  template <typename T>
  struct is_optional<std::optional<T>> : std::true_type {};

  struct Binding {
    std::string key;
    CLI::Option* option = nullptr;
    bool from_file = false;
    std::function<void(const json&)> load;
    std::function<json()> dump;
  };

  template <typename T>
  void remember(const std::string& flag, CLI::Option* opt, T& field) {
    Binding b;
    b.key = key_for_flag(flag);
    b.option = opt;
    b.load = [&field](const json& j) {
      if constexpr (is_optional<T>::value) {
        field = j.is_null() ? T{} : T{j.get<typename T::value_type>()};
      } else {
        field = j.get<T>();
      }
    };
    b.dump = [&field]() -> json {
      if constexpr (is_optional<T>::value) {
        return field ? json(*field) : json(nullptr);
      } else {
        return json(field);
      }
    };
    bindings_.push_back(std::move(b));
  }

  CLI::App& app_;
  std::vector<Binding> bindings_;
  std::set<std::string> environment_;
};

}  // namespace sqmz::cli
