// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "gridsplit/error.hpp"
#include "gridsplit/netcore.hpp"

namespace gridsplit {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

bool parse_number(const std::string& tok, double& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

const std::vector<std::string> kBusColumns = {"bus", "type", "Pd", "Qd", "Gs", "Bs", "baseKV"};
const std::vector<std::string> kBranchColumns = {"fbus", "tbus", "r", "x", "b", "status"};
const std::vector<std::string> kGenRequired = {"bus", "kind", "key"};

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

const char* bus_kind_name(BusKind kind) noexcept {
  switch (kind) {
    case BusKind::slack: return "slack";
    case BusKind::pv: return "pv";
    case BusKind::pq: return "pq";
  }
  return "pq";
}

const char* device_kind_name(DeviceKind kind) noexcept {
  return kind == DeviceKind::gfm ? "gfm" : "machine";
}

bool ParamBlock::has(const std::string& key) const {
  return std::any_of(values.begin(), values.end(), [&](const auto& kv) { return kv.first == key; });
}

double ParamBlock::get(const std::string& key) const {
  for (const auto& [k, v] : values)
    if (k == key) return v;
  throw Error(ErrorCode::validation, "block [" + std::string(device_kind_name(kind)) + " " + name +
                                         "] is missing key '" + key + "'");
}

double ParamBlock::get_or(const std::string& key, double fallback) const {
  for (const auto& [k, v] : values)
    if (k == key) return v;
  return fallback;
}

void ParamBlock::set(const std::string& key, double value) {
  for (auto& [k, v] : values)
    if (k == key) {
      v = value;
      return;
    }
  values.emplace_back(key, value);
}

int PowerFlowCase::bus_index(int number) const {
  for (const auto& b : buses)
    if (b.number == number) return b.id;
  return -1;
}

const ParamBlock& PowerFlowCase::block(const std::string& name) const {
  for (const auto& b : blocks)
    if (b.name == name) return b;
  throw Error(ErrorCode::validation, "no parameter block named '" + name + "'");
}

double PowerFlowCase::omega_s() const { return 2.0 * M_PI * frequency; }

void validate_case(const PowerFlowCase& c) {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::validation, m); };
  if (!(c.base_mva > 0.0)) fail("base_mva must be positive");
  if (!(c.frequency > 0.0)) fail("frequency must be positive");
  if (c.buses.empty()) fail("case has no buses");
  std::set<int> numbers;
  for (std::size_t i = 0; i < c.buses.size(); ++i) {
    const Bus& b = c.buses[i];
    if (b.id != static_cast<int>(i)) fail("bus ids are not contiguous");
    if (!numbers.insert(b.number).second) fail("duplicate bus id " + std::to_string(b.number));
  }
  const int n = static_cast<int>(c.buses.size());
  for (std::size_t k = 0; k < c.branches.size(); ++k) {
    const Branch& br = c.branches[k];
    std::string tag = "branch " + std::to_string(k + 1);
    if (br.from < 0 || br.from >= n || br.to < 0 || br.to >= n) fail(tag + " references an unknown bus");
    if (br.from == br.to) fail(tag + " has from == to");
    if (br.in_service) {
      if (!(std::isfinite(br.series_y.real()) && std::isfinite(br.series_y.imag())) ||
          br.series_y == Complex{})
        fail(tag + " has a zero or non-finite series admittance");
    }
  }
  for (const auto& g : c.generators) {
    if (g.bus < 0 || g.bus >= n) fail("generator '" + g.key + "' references an unknown bus");
    bool found = false;
    for (const auto& blk : c.blocks)
      if (blk.name == g.key) {
        if (blk.kind != g.kind) fail("generator '" + g.key + "' kind does not match its block");
        found = true;
      }
    if (!found) fail("generator '" + g.key + "' has no parameter block");
  }
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  for (const auto& br : c.branches)
    if (br.in_service) parent[static_cast<std::size_t>(find_root(parent, br.from))] = find_root(parent, br.to);
  std::map<int, int> slack_count;
  std::set<int> roots;
  for (int i = 0; i < n; ++i) {
    int r = find_root(parent, i);
    roots.insert(r);
    if (c.buses[static_cast<std::size_t>(i)].kind == BusKind::slack) ++slack_count[r];
  }
  for (int r : roots)
    if (slack_count[r] != 1)
      fail("connected network containing bus " + std::to_string(c.buses[static_cast<std::size_t>(r)].number) +
           " has " + std::to_string(slack_count[r]) + " slack buses, expected exactly one");
}

PowerFlowCase parse_case(const std::string& text, const std::string& source) {
  PowerFlowCase c;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  enum class Section { header, bus, branch, gen, block } section = Section::header;
  std::vector<std::string> columns;
  struct BranchRef {
    int from, to, line;
  };
  std::vector<BranchRef> branch_numbers;
  std::vector<std::pair<int, int>> gen_lines;  // (bus number, line)
  std::set<std::string> block_names;

  auto fail = [&](const std::string& m) { throw ParseError(source, line_no, m); };
  auto number = [&](const std::string& tok) {
    double v;
    if (!parse_number(tok, v)) fail("expected a number, got '" + tok + "'");
    return v;
  };
  auto column = [&](const std::vector<std::string>& row, const std::string& name) -> const std::string* {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return &row[i];
    return nullptr;
  };

  while (std::getline(in, raw)) {
    ++line_no;
    auto hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      auto parts = split_ws(line.substr(1, line.size() - 2));
      if (parts.empty()) fail("empty section header");
      columns.clear();
      if (parts.size() == 1 && parts[0] == "bus") section = Section::bus;
      else if (parts.size() == 1 && parts[0] == "branch") section = Section::branch;
      else if (parts.size() == 1 && parts[0] == "gen") section = Section::gen;
      else if (parts.size() == 2 && (parts[0] == "gfm" || parts[0] == "machine")) {
        if (!block_names.insert(parts[1]).second) fail("duplicate parameter block '" + parts[1] + "'");
        ParamBlock b;
        b.kind = parts[0] == "gfm" ? DeviceKind::gfm : DeviceKind::machine;
        b.name = parts[1];
        c.blocks.push_back(b);
        section = Section::block;
      } else {
        fail("unknown section '" + line + "'");
      }
      continue;
    }
    if (section == Section::header || section == Section::block) {
      auto eq = line.find('=');
      if (eq == std::string::npos) fail("expected 'key = value'");
      std::string key = trim(line.substr(0, eq));
      std::string val = trim(line.substr(eq + 1));
      if (key.empty()) fail("empty key");
      double v = number(val);
      if (section == Section::block) {
        if (c.blocks.back().has(key)) fail("duplicate key '" + key + "'");
        c.blocks.back().values.emplace_back(key, v);
      } else if (key == "base_mva") {
        c.base_mva = v;
      } else if (key == "frequency") {
        c.frequency = v;
      } else {
        fail("unknown header key '" + key + "'");
      }
      continue;
    }
    auto row = split_ws(line);
    if (columns.empty()) {
      columns = row;
      const auto& required = section == Section::bus ? kBusColumns
                             : section == Section::branch ? kBranchColumns
                                                          : kGenRequired;
      for (const auto& name : required)
        if (std::find(columns.begin(), columns.end(), name) == columns.end())
          fail("missing column '" + name + "'");
      if (section != Section::gen && columns.size() != required.size())
        fail("unexpected column set");
      continue;
    }
    if (row.size() != columns.size())
      fail("expected " + std::to_string(columns.size()) + " fields, got " + std::to_string(row.size()));
    if (section == Section::bus) {
      Bus b;
      double num = number(*column(row, "bus"));
      if (num != std::floor(num)) fail("bus id must be an integer");
      b.number = static_cast<int>(num);
      b.id = static_cast<int>(c.buses.size());
      const std::string& t = *column(row, "type");
      if (t == "1" || t == "pq") b.kind = BusKind::pq;
      else if (t == "2" || t == "pv") b.kind = BusKind::pv;
      else if (t == "3" || t == "slack" || t == "ref") b.kind = BusKind::slack;
      else fail("unknown bus type '" + t + "'");
      b.pd = number(*column(row, "Pd"));
      b.qd = number(*column(row, "Qd"));
      b.gs = number(*column(row, "Gs"));
      b.bs = number(*column(row, "Bs"));
      b.base_kv = number(*column(row, "baseKV"));
      c.buses.push_back(b);
    } else if (section == Section::branch) {
      Branch br;
      branch_numbers.push_back({static_cast<int>(number(*column(row, "fbus"))),
                                static_cast<int>(number(*column(row, "tbus"))), line_no});
      br.r = number(*column(row, "r"));
      br.x = number(*column(row, "x"));
      br.charging = number(*column(row, "b"));
      double st = number(*column(row, "status"));
      if (st != 0.0 && st != 1.0) fail("status must be 0 or 1");
      br.in_service = st == 1.0;
      if (br.r != 0.0 || br.x != 0.0) br.series_y = 1.0 / Complex(br.r, br.x);
      c.branches.push_back(br);
    } else {
      GeneratorRecord g;
      gen_lines.emplace_back(static_cast<int>(number(*column(row, "bus"))), line_no);
      const std::string& kind = *column(row, "kind");
      if (kind == "machine") g.kind = DeviceKind::machine;
      else if (kind == "gfm") g.kind = DeviceKind::gfm;
      else fail("unknown device kind '" + kind + "'");
      g.key = *column(row, "key");
      if (const auto* p = column(row, "Pg")) g.pg = number(*p);
      if (const auto* v = column(row, "Vg")) g.vg = number(*v);
      c.generators.push_back(g);
    }
  }

  for (auto& b : c.buses) {
    b.load = Complex(b.pd, b.qd) / c.base_mva;
    b.shunt = Complex(b.gs, b.bs) / c.base_mva;
  }
  for (std::size_t k = 0; k < c.branches.size(); ++k) {
    line_no = branch_numbers[k].line;
    int f = c.bus_index(branch_numbers[k].from);
    int t = c.bus_index(branch_numbers[k].to);
    if (f < 0 || t < 0) fail("branch references an unknown bus");
    c.branches[k].from = f;
    c.branches[k].to = t;
  }
  for (std::size_t k = 0; k < c.generators.size(); ++k) {
    line_no = gen_lines[k].second;
    int b = c.bus_index(gen_lines[k].first);
    if (b < 0) fail("generator references an unknown bus");
    c.generators[k].bus = b;
  }
  validate_case(c);
  return c;
}

PowerFlowCase load_case(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open case file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_case(ss.str(), path.string());
}

std::string serialize_case(const PowerFlowCase& c) {
  std::ostringstream out;
  out << "base_mva = " << format_double(c.base_mva) << "\n";
  out << "frequency = " << format_double(c.frequency) << "\n\n[bus]\n";
  out << "bus type Pd Qd Gs Bs baseKV\n";
  for (const auto& b : c.buses)
    out << b.number << ' ' << bus_kind_name(b.kind) << ' ' << format_double(b.pd) << ' '
        << format_double(b.qd) << ' ' << format_double(b.gs) << ' ' << format_double(b.bs) << ' '
        << format_double(b.base_kv) << "\n";
  out << "\n[branch]\nfbus tbus r x b status\n";
  for (const auto& br : c.branches)
    out << c.buses[static_cast<std::size_t>(br.from)].number << ' '
        << c.buses[static_cast<std::size_t>(br.to)].number << ' ' << format_double(br.r) << ' '
        << format_double(br.x) << ' ' << format_double(br.charging) << ' ' << (br.in_service ? 1 : 0)
        << "\n";
  out << "\n[gen]\nbus kind key Pg Vg\n";
  for (const auto& g : c.generators)
    out << c.buses[static_cast<std::size_t>(g.bus)].number << ' ' << device_kind_name(g.kind) << ' '
        << g.key << ' ' << format_double(g.pg) << ' ' << format_double(g.vg) << "\n";
  for (const auto& blk : c.blocks) {
    out << "\n[" << device_kind_name(blk.kind) << ' ' << blk.name << "]\n";
    for (const auto& [k, v] : blk.values) out << k << " = " << format_double(v) << "\n";
  }
  return out.str();
}

}  // namespace gridsplit
