#include "jsonl.hpp"

#include <iostream>

#include "hardmeta/error.hpp"

namespace hardmeta::detail {

void for_each_record(std::istream& in, const std::string& source,
                     const std::function<void(const json&, std::size_t)>& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(source, line_no, std::string("malformed record: ") + e.what());
    }
    if (!record.is_object()) {
      throw ParseError(source, line_no, "record is not an object");
    }
    fn(record, line_no);
  }
  if (in.bad()) throw DataError(source + ": read failure");
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  return out;
}

void check_keys(const json& record, std::initializer_list<std::string_view> known,
                const std::string& source, std::size_t line, Warnings* warnings) {
  for (const auto& [key, value] : record.items()) {
    bool found = false;
    for (auto k : known) {
      if (k == key) {
        found = true;
        break;
      }
    }
    if (found) continue;
    std::string msg = source + ":" + std::to_string(line) + ": ignoring unknown key '" + key + "'";
    if (warnings) {
      warnings->push_back(std::move(msg));
    } else {
      std::cerr << "warning: " << msg << '\n';
    }
  }
}

std::string get_string(const json& record, const char* key,
                       const std::string& source, std::size_t line) {
  auto it = record.find(key);
  if (it == record.end()) {
    throw ParseError(source, line, std::string("missing key '") + key + "'");
  }
  if (!it->is_string()) {
    throw ParseError(source, line, std::string("key '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

long long get_integer(const json& record, const char* key,
                      const std::string& source, std::size_t line) {
  auto it = record.find(key);
  if (it == record.end()) {
    throw ParseError(source, line, std::string("missing key '") + key + "'");
  }
  if (!it->is_number_integer()) {
    throw ParseError(source, line, std::string("key '") + key + "' must be an integer");
  }
  return it->get<long long>();
}

double get_number(const json& record, const char* key,
                  const std::string& source, std::size_t line) {
  auto it = record.find(key);
  if (it == record.end()) {
    throw ParseError(source, line, std::string("missing key '") + key + "'");
  }
  if (!it->is_number()) {
    throw ParseError(source, line, std::string("key '") + key + "' must be a number");
  }
  return it->get<double>();
}

void write_line(std::ostream& out, const ordered_json& record) {
  out << record.dump() << '\n';
}

}  // namespace hardmeta::detail
