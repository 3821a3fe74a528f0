#pragma once

// Internal helpers for the line-oriented JSON files the pipeline exchanges.

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <istream>
#include <string>
#include <string_view>

#include "hardmeta/corpus.hpp"
#include "json.hpp"

namespace hardmeta::detail {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

/// Calls `fn(record, line_number)` for each non-blank line. Lines that are
/// not JSON objects raise ParseError.
void for_each_record(std::istream& in, const std::string& source,
                     const std::function<void(const json&, std::size_t)>& fn);

std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);

/// Warns about keys outside `known`.
void check_keys(const json& record, std::initializer_list<std::string_view> known,
                const std::string& source, std::size_t line, Warnings* warnings);

/// Typed field access; a missing or mistyped field raises ParseError.
std::string get_string(const json& record, const char* key,
                       const std::string& source, std::size_t line);
long long get_integer(const json& record, const char* key,
                      const std::string& source, std::size_t line);
double get_number(const json& record, const char* key,
                  const std::string& source, std::size_t line);

void write_line(std::ostream& out, const ordered_json& record);

}  // namespace hardmeta::detail
