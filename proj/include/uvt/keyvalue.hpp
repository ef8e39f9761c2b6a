#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace uvt {

/// Flat `key = value` text: one pair per line, `#` starts a comment, blank
/// lines ignored. Keys are unique.
class KeyValues {
public:
    KeyValues() = default;

    [[nodiscard]] static KeyValues parse(const std::string& text);
    [[nodiscard]] static KeyValues load(const std::filesystem::path& path);

    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
    [[nodiscard]] bool contains(const std::string& key) const { return values_.count(key) != 0; }
    [[nodiscard]] const std::map<std::string, std::string>& entries() const { return values_; }

    [[nodiscard]] std::optional<std::string> find(const std::string& key) const;
    [[nodiscard]] std::string get(const std::string& key) const;
    [[nodiscard]] std::string get_or(const std::string& key, const std::string& fallback) const;
    [[nodiscard]] double get_double(const std::string& key) const;
    [[nodiscard]] double get_double_or(const std::string& key, double fallback) const;
    [[nodiscard]] long long get_int(const std::string& key) const;
    [[nodiscard]] long long get_int_or(const std::string& key, long long fallback) const;
    [[nodiscard]] std::uint64_t get_u64_or(const std::string& key, std::uint64_t fallback) const;
    [[nodiscard]] bool get_bool_or(const std::string& key, bool fallback) const;
    /// Comma-separated list of numbers.
    [[nodiscard]] std::vector<double> get_list(const std::string& key) const;

    /// Serialized in key order.
    [[nodiscard]] std::string to_string() const;
    void save(const std::filesystem::path& path) const;

private:
    std::map<std::string, std::string> values_;
};

} // namespace uvt
