#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcic {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class ConfigType { kString, kInt, kDouble, kBool };

struct ConfigKeyInfo {
    const char* key;
    ConfigType type;
    const char* default_value;
    const char* doc;
};

/// Flat `key = value` configuration with dotted keys. Every key must appear
/// in the registry; values are type-checked when set. Keys under the
/// reserved `stats.` prefix are informational outputs written into stage
/// manifests; they load without registration so a manifest is itself a valid
/// config file.
class Config {
  public:
    Config();  // registry defaults

    static const std::vector<ConfigKeyInfo>& registry();

    static Config from_file(const std::string& path);
    void apply_file(const std::string& path);

    /// Sets one key from text (the `--set key=value` path). Throws on an
    /// unregistered key or a value that fails the key's type check.
    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::int64_t get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;

    /// Comma-separated list value, trimmed, empties dropped.
    std::vector<std::string> get_list(const std::string& key) const;

    /// Writes every key (plus the given stats entries) as `key = value`
    /// lines; the result loads back with from_file.
    void write(const std::string& path,
               const std::map<std::string, std::string>& stats = {}) const;

  private:
    std::map<std::string, std::string> values_;
};

}  // namespace pcic
