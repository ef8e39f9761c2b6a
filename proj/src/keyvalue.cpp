#include "uvt/keyvalue.hpp"

#include <fstream>
#include <sstream>

#include "uvt/errors.hpp"
#include "uvt/io.hpp"

namespace uvt {

namespace {

std::string strip(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

} // namespace

KeyValues KeyValues::parse(const std::string& text) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = strip(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidInput("line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = strip(line.substr(0, eq));
        if (key.empty())
            throw InvalidInput("line " + std::to_string(line_no) + ": empty key");
        if (kv.contains(key))
            throw InvalidInput("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        kv.values_[key] = strip(line.substr(eq + 1));
    }
    return kv;
}

KeyValues KeyValues::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse(buffer.str());
    } catch (const InvalidInput& e) {
        throw InvalidInput(path.string() + ": " + e.what());
    }
}

std::optional<std::string> KeyValues::find(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end())
        return std::nullopt;
    return it->second;
}

std::string KeyValues::get(const std::string& key) const {
    auto v = find(key);
    if (!v)
        throw InvalidInput("missing key '" + key + "'");
    return *v;
}

std::string KeyValues::get_or(const std::string& key, const std::string& fallback) const {
    return find(key).value_or(fallback);
}

double KeyValues::get_double(const std::string& key) const {
    try {
        return io::parse_double(get(key));
    } catch (const InvalidInput& e) {
        throw InvalidInput("key '" + key + "': " + e.what());
    }
}

double KeyValues::get_double_or(const std::string& key, double fallback) const {
    return contains(key) ? get_double(key) : fallback;
}

long long KeyValues::get_int(const std::string& key) const {
    const std::string v = get(key);
    std::size_t used = 0;
    long long out = 0;
    try {
        out = std::stoll(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size())
        throw InvalidInput("key '" + key + "': not an integer: '" + v + "'");
    return out;
}

long long KeyValues::get_int_or(const std::string& key, long long fallback) const {
    return contains(key) ? get_int(key) : fallback;
}

std::uint64_t KeyValues::get_u64_or(const std::string& key, std::uint64_t fallback) const {
    if (!contains(key))
        return fallback;
    const std::string v = get(key);
    std::size_t used = 0;
    std::uint64_t out = 0;
    try {
        out = std::stoull(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size())
        throw InvalidInput("key '" + key + "': not an unsigned integer: '" + v + "'");
    return out;
}

bool KeyValues::get_bool_or(const std::string& key, bool fallback) const {
    if (!contains(key))
        return fallback;
    const std::string v = get(key);
    if (v == "true" || v == "1" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "no")
        return false;
    throw InvalidInput("key '" + key + "': not a boolean: '" + v + "'");
}

std::vector<double> KeyValues::get_list(const std::string& key) const {
    std::vector<double> out;
    std::istringstream in(get(key));
    std::string item;
    while (std::getline(in, item, ','))
        out.push_back(io::parse_double(item));
    return out;
}

std::string KeyValues::to_string() const {
    std::string out;
    for (const auto& [k, v] : values_)
        out += k + " = " + v + "\n";
    return out;
}

void KeyValues::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path.string());
    out << to_string();
    if (!out)
        throw IoError("write failed: " + path.string());
}

} // namespace uvt
