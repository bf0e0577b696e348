#include "kam/serialization.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "kam/errors.hpp"

namespace kam {

namespace {

json coeff_list(const TorusSeries& f, double prune) {
  json list = json::array();
  const auto& lat = f.lattice();
  for (std::size_t idx = 0; idx < f.size(); ++idx) {
    const cplx c = f[idx];
    if (c == cplx{} || std::abs(c) <= prune) continue;
    list.push_back({{"k", lat.mode_vector(idx)}, {"re", c.real()}, {"im", c.imag()}});
  }
  return list;
}

void read_coeffs(const json& list, TorusSeries& f) {
  for (const auto& item : list) {
    const auto k = item.at("k").get<std::vector<int>>();
    f.set(k, cplx(item.at("re").get<double>(), item.at("im").get<double>()));
  }
}

}  // namespace

json to_json(const TorusSeries& f, double prune) {
  return {{"n", f.dim()}, {"K", f.cutoff()}, {"coeffs", coeff_list(f, prune)}};
}

TorusSeries series_from_json(const json& j) {
  try {
    TorusSeries f(j.at("n").get<int>(), j.at("K").get<int>());
    read_coeffs(j.at("coeffs"), f);
    return f;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed series document: ") + e.what());
  }
}

json to_json(const OperatorSeries& op, double prune) {
  json entries = json::array();
  for (int i = 0; i < op.rows(); ++i) {
    for (int j = 0; j < op.rows(); ++j) {
      auto list = coeff_list(op(i, j), prune);
      if (list.empty()) continue;
      entries.push_back({{"i", i}, {"j", j}, {"coeffs", std::move(list)}});
    }
  }
  return {{"n", op.dim()}, {"K", op.cutoff()}, {"N", op.rows()}, {"entries", std::move(entries)}};
}

OperatorSeries operator_from_json(const json& j) {
  try {
    OperatorSeries op(j.at("N").get<int>(), j.at("n").get<int>(), j.at("K").get<int>());
    for (const auto& e : j.at("entries")) {
      const int i = e.at("i").get<int>(), jj = e.at("j").get<int>();
      if (i < 0 || jj < 0 || i >= op.rows() || jj >= op.rows()) throw InvalidArgument("entry index out of range");
      read_coeffs(e.at("coeffs"), op(i, jj));
    }
    return op;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed operator document: ") + e.what());
  }
}

std::string checksum_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_artifact(const std::filesystem::path& path, const json& payload) {
  const std::string body = payload.dump();
  json doc = {{"checksum", checksum_hex(body)}, {"payload", payload}};
  write_text(path, doc.dump() + "\n");
}

json read_artifact(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw ChecksumError("artifact " + path.string() + " is not valid JSON");
  }
  if (!doc.is_object() || !doc.contains("payload") || !doc.contains("checksum"))
    throw ChecksumError("artifact " + path.string() + " lacks payload or checksum");
  const std::string body = doc["payload"].dump();
  if (checksum_hex(body) != doc["checksum"].get<std::string>())
    throw ChecksumError("checksum mismatch in " + path.string());
  return doc["payload"];
}

}  // namespace kam
