#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "turnkit/errors.hpp"

namespace turnkit {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace jsonl {

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    if (in.bad()) throw IoError("read failure on " + path.string());
    return lines;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write failure on " + path.string());
}

/// Compact UTF-8 serialization with no ASCII escaping of non-ASCII text.
template <typename Json>
std::string dump(const Json& value) {
    return value.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
}

template <typename Json>
void write_records(const std::filesystem::path& path, const std::vector<Json>& records) {
    std::string body;
    for (const auto& r : records) {
        body += dump(r);
        body += '\n';
    }
    write_file(path, body);
}

inline json parse_json_file(const std::filesystem::path& path) {
    const auto text = read_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(0, path.string(), std::string("invalid JSON: ") + e.what());
    }
}

}  // namespace jsonl
}  // namespace turnkit
