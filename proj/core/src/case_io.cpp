#include "gridsec/case_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

namespace gridsec::net {

namespace {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// MATPOWER-subset reader.  Recognizes `mpc.baseMVA = <num>;` scalars and
// `mpc.<name> = [ rows ];` matrices; rows are ;-separated, `%` starts a
// comment.  Only the documented columns are consumed.
// ---------------------------------------------------------------------------

struct MatpowerDoc {
  double base_mva = 100.0;
  std::map<std::string, std::vector<std::vector<double>>> matrices;
};

[[noreturn]] void parse_fail(int line, const std::string& msg) {
  throw ParseError("line " + std::to_string(line) + ": " + msg);
}

std::string strip_comment(const std::string& line) {
  auto pos = line.find('%');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

bool parse_row(const std::string& text, std::vector<double>& out, int lineno) {
  out.clear();
  const char* p = text.data();
  const char* end = p + text.size();
  while (p < end) {
    while (p < end && (std::isspace(static_cast<unsigned char>(*p)) || *p == ',')) ++p;
    if (p >= end) break;
    double v = 0.0;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc()) {
      parse_fail(lineno, std::string("expected a number, found '") +
                             std::string(p, std::min<size_t>(8, end - p)) + "'");
    }
    out.push_back(v);
    p = next;
  }
  return !out.empty();
}

MatpowerDoc read_matpower(std::istream& in) {
  MatpowerDoc doc;
  std::string line;
  int lineno = 0;
  bool in_matrix = false;
  std::string matname;
  std::string pending;  // row text accumulated until ';'
  std::vector<double> row;

  auto consume_pending = [&]() {
    size_t close = pending.find(']');
    std::string body = close == std::string::npos ? pending : pending.substr(0, close);

    // consume complete ;-terminated rows
    size_t start = 0;
    for (size_t i = 0; i < body.size(); ++i) {
      if (body[i] == ';' || body[i] == '\n') {
        std::string rowtext = body.substr(start, i - start);
        if (parse_row(rowtext, row, lineno)) doc.matrices[matname].push_back(row);
        start = i + 1;
      }
    }
    if (close != std::string::npos) {
      std::string tail = body.substr(start);
      if (parse_row(tail, row, lineno)) doc.matrices[matname].push_back(row);
      in_matrix = false;
      pending.clear();
    } else {
      pending = body.substr(start);
    }
  };

  while (std::getline(in, line)) {
    ++lineno;
    std::string s = strip_comment(line);

    if (!in_matrix) {
      auto eq = s.find('=');
      auto dot = s.find("mpc.");
      if (dot == std::string::npos || eq == std::string::npos) continue;
      std::string name = s.substr(dot + 4, eq - dot - 4);
      name.erase(std::remove_if(name.begin(), name.end(),
                                [](unsigned char c) { return std::isspace(c); }),
                 name.end());
      std::string rhs = s.substr(eq + 1);
      auto bracket = rhs.find('[');
      if (bracket != std::string::npos) {
        in_matrix = true;
        matname = name;
        doc.matrices[matname];
        pending = rhs.substr(bracket + 1);
        consume_pending();
      } else if (name == "baseMVA") {
        double v = 0.0;
        if (std::sscanf(rhs.c_str(), " %lf", &v) != 1) parse_fail(lineno, "bad baseMVA value");
        doc.base_mva = v;
      }
      continue;
    }

    pending += "\n" + s;
    consume_pending();
  }
  if (in_matrix) throw ParseError("unterminated matrix mpc." + matname);
  return doc;
}

double column(const std::vector<double>& row, size_t col1, double fallback,
              bool required, const char* what, int rownum) {
  if (row.size() < col1) {
    if (required) {
      throw ParseError(std::string(what) + " row " + std::to_string(rownum) + ": missing column " +
                       std::to_string(col1));
    }
    return fallback;
  }
  return row[col1 - 1];
}

Network from_matpower(const MatpowerDoc& doc, std::vector<std::string>* notes) {
  auto need = [&](const char* name) -> const std::vector<std::vector<double>>& {
    auto it = doc.matrices.find(name);
    if (it == doc.matrices.end() || it->second.empty()) {
      throw ParseError(std::string("case is missing mpc.") + name);
    }
    return it->second;
  };

  const auto& bus_m = need("bus");
  const auto& branch_m = need("branch");
  const auto& gen_m = need("gen");

  std::vector<Bus> buses;
  int reference = 0;
  int n_ref = 0;
  for (size_t r = 0; r < bus_m.size(); ++r) {
    Bus b;
    b.id = static_cast<int>(column(bus_m[r], 1, 0, true, "bus", static_cast<int>(r + 1)));
    const int type = static_cast<int>(column(bus_m[r], 2, 1, true, "bus", static_cast<int>(r + 1)));
    b.forecast_load = column(bus_m[r], 3, 0.0, true, "bus", static_cast<int>(r + 1));
    if (type == 3) {
      reference = b.id;
      ++n_ref;
    }
    buses.push_back(b);
  }
  if (n_ref != 1) {
    throw ParseError("expected exactly one reference bus (type 3), found " +
                     std::to_string(n_ref));
  }

  std::vector<Branch> branches;
  for (size_t r = 0; r < branch_m.size(); ++r) {
    const int rownum = static_cast<int>(r + 1);
    const double status = column(branch_m[r], 11, 1.0, false, "branch", rownum);
    if (status == 0.0) continue;
    Branch br;
    br.id = rownum;
    br.from_bus = static_cast<int>(column(branch_m[r], 1, 0, true, "branch", rownum));
    br.to_bus = static_cast<int>(column(branch_m[r], 2, 0, true, "branch", rownum));
    br.reactance = column(branch_m[r], 4, 0.0, true, "branch", rownum);
    const double rate_a = column(branch_m[r], 6, 0.0, false, "branch", rownum);
    br.rating = rate_a > 0.0 ? rate_a : kUnlimitedRating;
    branches.push_back(br);
  }

  const auto* gencost = doc.matrices.count("gencost") ? &doc.matrices.at("gencost") : nullptr;
  std::vector<Generator> gens;
  for (size_t r = 0; r < gen_m.size(); ++r) {
    const int rownum = static_cast<int>(r + 1);
    Generator g;
    g.id = rownum;
    g.bus = static_cast<int>(column(gen_m[r], 1, 0, true, "gen", rownum));
    g.p_max = column(gen_m[r], 9, 0.0, true, "gen", rownum);
    g.p_min = column(gen_m[r], 10, 0.0, true, "gen", rownum);
    if (g.p_min < 0.0) {
      // pumping / synchronous-condenser modes are out of scope for DC dispatch
      if (notes) {
        notes->push_back("gen row " + std::to_string(rownum) + ": negative PMIN " +
                         std::to_string(g.p_min) + " clamped to 0");
      }
      g.p_min = 0.0;
    }

    if (gencost) {
      if (gencost->size() != gen_m.size() && gencost->size() != 2 * gen_m.size()) {
        throw ParseError("mpc.gencost must have one (or two) rows per generator");
      }
      const auto& c = (*gencost)[r];
      const int model = static_cast<int>(column(c, 1, 2, true, "gencost", rownum));
      if (model != 2) {
        throw ParseError("gencost row " + std::to_string(rownum) +
                         ": only polynomial cost MODEL=2 is supported");
      }
      const int ncost = static_cast<int>(column(c, 4, 0, true, "gencost", rownum));
      if (static_cast<int>(c.size()) < 4 + ncost) {
        throw ParseError("gencost row " + std::to_string(rownum) + ": truncated coefficients");
      }
      // coefficients are highest order first
      double c2 = 0.0, c1 = 0.0;
      if (ncost >= 3) {
        c2 = c[4];
        c1 = c[5];
      } else if (ncost == 2) {
        c1 = c[4];
      }
      g.cost = c1;
      if (c2 != 0.0) {
        g.cost = c1 + c2 * (g.p_min + g.p_max);  // slope at the midpoint dispatch
        if (notes) {
          notes->push_back("gencost row " + std::to_string(rownum) +
                           ": quadratic coefficient " + std::to_string(c2) +
                           " linearized at midpoint, effective marginal cost " +
                           std::to_string(g.cost));
        }
      }
    }
    gens.push_back(g);
  }

  return Network(std::move(buses), std::move(branches), std::move(gens), reference, doc.base_mva);
}

// ---------------------------------------------------------------------------
// Native JSON
// ---------------------------------------------------------------------------

Network from_json(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("JSON parse error: ") + e.what());
  }
  try {
    if (!doc.contains("schema") || doc["schema"].get<int>() != 1) {
      throw ParseError("unsupported or missing schema version (expected \"schema\": 1)");
    }
    std::vector<Bus> buses;
    for (const auto& jb : doc.at("buses")) {
      Bus b;
      b.id = jb.at("id").get<int>();
      b.forecast_load = jb.value("load", 0.0);
      buses.push_back(b);
    }
    std::vector<Branch> branches;
    int next_id = 1;
    for (const auto& jb : doc.at("branches")) {
      Branch br;
      br.id = jb.value("id", next_id);
      br.from_bus = jb.at("from").get<int>();
      br.to_bus = jb.at("to").get<int>();
      br.reactance = jb.at("x").get<double>();
      const double rating = jb.value("rating", 0.0);
      br.rating = rating > 0.0 ? rating : kUnlimitedRating;
      branches.push_back(br);
      ++next_id;
    }
    std::vector<Generator> gens;
    int next_gid = 1;
    for (const auto& jg : doc.at("generators")) {
      Generator g;
      g.id = jg.value("id", next_gid);
      g.bus = jg.at("bus").get<int>();
      g.p_min = jg.value("p_min", 0.0);
      g.p_max = jg.at("p_max").get<double>();
      g.cost = jg.at("cost").get<double>();
      gens.push_back(g);
      ++next_gid;
    }
    const int ref = doc.at("reference_bus").get<int>();
    const double base = doc.value("base_mva", 100.0);
    return Network(std::move(buses), std::move(branches), std::move(gens), ref, base);
  } catch (const json::exception& e) {
    throw ParseError(std::string("JSON case field error: ") + e.what());
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

Network parse_case(std::istream& source, CaseFormat format, std::vector<std::string>* notes) {
  switch (format) {
    case CaseFormat::matpower_m: return from_matpower(read_matpower(source), notes);
    case CaseFormat::native_json: return from_json(source);
  }
  throw ParseError("unknown case format");
}

Network load_case(const std::filesystem::path& path, std::vector<std::string>* notes) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open case file " + path.string());
  const auto ext = path.extension().string();
  if (ext == ".m") return parse_case(in, CaseFormat::matpower_m, notes);
  if (ext == ".json") return parse_case(in, CaseFormat::native_json, notes);
  throw ParseError("cannot infer case format from extension '" + ext + "' (use .m or .json)");
}

std::string to_case_json(const Network& net) {
  json doc;
  doc["schema"] = 1;
  doc["base_mva"] = net.base_mva();
  doc["reference_bus"] = net.reference_bus_id();
  json buses = json::array();
  for (const auto& b : net.buses()) {
    json jb{{"id", b.id}, {"load", b.forecast_load}};
    if (b.zero_injection) jb["zero_injection"] = true;
    buses.push_back(jb);
  }
  doc["buses"] = std::move(buses);
  json branches = json::array();
  for (const auto& br : net.branches()) {
    json jb{{"id", br.id}, {"from", br.from_bus}, {"to", br.to_bus}, {"x", br.reactance}};
    if (br.rated()) jb["rating"] = br.rating;
    branches.push_back(jb);
  }
  doc["branches"] = std::move(branches);
  json gens = json::array();
  for (const auto& g : net.generators()) {
    gens.push_back(json{
        {"id", g.id}, {"bus", g.bus}, {"p_min", g.p_min}, {"p_max", g.p_max}, {"cost", g.cost}});
  }
  doc["generators"] = std::move(gens);
  return doc.dump(2);
}

void write_case_json(const Network& net, std::ostream& out) { out << to_case_json(net) << "\n"; }

void write_case_m(const Network& net, std::ostream& out, const std::string& name) {
  out << "function mpc = " << name << "\n";
  out << "mpc.version = '2';\n";
  out << "mpc.baseMVA = " << fmt(net.base_mva()) << ";\n";
  out << "\n%% bus data\n%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin\n";
  out << "mpc.bus = [\n";
  for (const auto& b : net.buses()) {
    const int type = b.id == net.reference_bus_id() ? 3 : 1;
    out << "\t" << b.id << "\t" << type << "\t" << fmt(b.forecast_load)
        << "\t0\t0\t0\t1\t1\t0\t0\t1\t1.1\t0.9;\n";
  }
  out << "];\n";
  out << "\n%% generator data\n%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin\n";
  out << "mpc.gen = [\n";
  for (const auto& g : net.generators()) {
    out << "\t" << g.bus << "\t0\t0\t0\t0\t1\t" << fmt(net.base_mva()) << "\t1\t" << fmt(g.p_max)
        << "\t" << fmt(g.p_min) << ";\n";
  }
  out << "];\n";
  out << "\n%% branch data\n%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\n";
  out << "mpc.branch = [\n";
  for (const auto& br : net.branches()) {
    const double rate = br.rated() ? br.rating : 0.0;
    out << "\t" << br.from_bus << "\t" << br.to_bus << "\t0\t" << fmt(br.reactance) << "\t0\t"
        << fmt(rate) << "\t0\t0\t0\t0\t1;\n";
  }
  out << "];\n";
  out << "\n%% generator cost data\n%\tmodel\tstartup\tshutdown\tn\tc1\tc0\n";
  out << "mpc.gencost = [\n";
  for (const auto& g : net.generators()) {
    out << "\t2\t0\t0\t2\t" << fmt(g.cost) << "\t0;\n";
  }
  out << "];\n";
}

}  // namespace gridsec::net
