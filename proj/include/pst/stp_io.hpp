#pragma once

#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pst/graph.hpp"

namespace pst {

/// Parse or validation failure, carrying the 1-based input line.
class ParseError : public std::runtime_error {
public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

private:
  int line_;
};

/// Known-optimum table keyed by instance name.
struct OptimumRegistry {
  std::map<std::string, double> entries;

  std::optional<double> lookup(const std::string& name) const {
    auto it = entries.find(name);
    if (it != entries.end()) return it->second;
    std::string lower = name;
    for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    it = entries.find(lower);
    if (it != entries.end()) return it->second;
    return std::nullopt;
  }
};

namespace detail {

inline std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline long parse_int(const std::string& tok, int line, const char* what) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError(line, std::string(what) + " is not an integer: '" + tok + "'");
  }
  if (pos != tok.size())
    throw ParseError(line, std::string(what) + " is not an integer: '" + tok + "'");
  return v;
}

inline double parse_real(const std::string& tok, int line, const char* what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError(line, std::string(what) + " is not a number: '" + tok + "'");
  }
  if (pos != tok.size())
    throw ParseError(line, std::string(what) + " is not a number: '" + tok + "'");
  return v;
}

}  // namespace detail

/// Parse a SteinLib STP stream into a validated Instance.
///
/// Keywords are matched case-insensitively (files in the wild mix
/// `SECTION`/`Section`); unknown sections such as Coordinates are skipped.
/// Parallel edges collapse to the minimum length. Structural violations
/// (bad ids, non-positive weights, missing sections, count mismatches,
/// disconnected graph) raise ParseError with the offending line.
inline Instance parse_stp(std::istream& in) {
  std::string line;
  int lineno = 0;
  bool saw_graph = false, saw_terminals = false;
  int graph_section_line = 0;
  long nodes = -1, declared_edges = -1, declared_terminals = -1;
  long edge_lines = 0;
  std::string name;
  // collapse parallel edges to the minimum length as we read
  std::map<std::pair<VertexId, VertexId>, double> edge_map;
  std::vector<VertexId> terminals;

  enum class Where { TopLevel, Graph, Terminals, Comment, Unknown };
  Where where = Where::TopLevel;
  bool first_content_line = true;
  bool saw_eof = false;

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto toks = detail::tokenize(line);
    if (toks.empty()) continue;
    std::string head = detail::lower(toks[0]);

    if (first_content_line && head.starts_with("33d32945")) {
      first_content_line = false;
      continue;  // format magic
    }
    first_content_line = false;
    if (saw_eof) throw ParseError(lineno, "content after EOF");

    switch (where) {
      case Where::TopLevel: {
        if (head == "section") {
          if (toks.size() < 2) throw ParseError(lineno, "SECTION without a name");
          std::string sect = detail::lower(toks[1]);
          if (sect == "graph") {
            if (saw_graph) throw ParseError(lineno, "duplicate SECTION Graph");
            where = Where::Graph;
            saw_graph = true;
            graph_section_line = lineno;
          } else if (sect == "terminals") {
            if (saw_terminals) throw ParseError(lineno, "duplicate SECTION Terminals");
            where = Where::Terminals;
            saw_terminals = true;
          } else if (sect == "comment") {
            where = Where::Comment;
          } else {
            where = Where::Unknown;
          }
        } else if (head == "eof") {
          saw_eof = true;
        } else {
          throw ParseError(lineno, "unexpected token outside any section: '" + toks[0] + "'");
        }
        break;
      }
      case Where::Comment: {
        if (head == "end") {
          where = Where::TopLevel;
        } else if (head == "name") {
          auto q1 = line.find('"');
          auto q2 = line.rfind('"');
          if (q1 != std::string::npos && q2 > q1) name = line.substr(q1 + 1, q2 - q1 - 1);
        }
        break;  // everything else in Comment is free text
      }
      case Where::Unknown: {
        if (head == "end") where = Where::TopLevel;
        break;
      }
      case Where::Graph: {
        if (head == "end") {
          where = Where::TopLevel;
        } else if (head == "nodes") {
          if (toks.size() != 2) throw ParseError(lineno, "Nodes expects one value");
          nodes = detail::parse_int(toks[1], lineno, "node count");
          if (nodes < 1) throw ParseError(lineno, "node count must be positive");
        } else if (head == "edges") {
          if (toks.size() != 2) throw ParseError(lineno, "Edges expects one value");
          declared_edges = detail::parse_int(toks[1], lineno, "edge count");
        } else if (head == "e") {
          if (toks.size() != 4) throw ParseError(lineno, "E expects 'E u v w'");
          if (nodes < 0) throw ParseError(lineno, "E line before Nodes");
          long u = detail::parse_int(toks[1], lineno, "edge endpoint");
          long v = detail::parse_int(toks[2], lineno, "edge endpoint");
          double w = detail::parse_real(toks[3], lineno, "edge weight");
          if (u < 1 || u > nodes) throw ParseError(lineno, "vertex id out of range: " + toks[1]);
          if (v < 1 || v > nodes) throw ParseError(lineno, "vertex id out of range: " + toks[2]);
          if (u == v) throw ParseError(lineno, "self-loop at vertex " + toks[1]);
          if (!(w > 0.0)) throw ParseError(lineno, "non-positive edge weight: " + toks[3]);
          ++edge_lines;
          auto key = std::make_pair(static_cast<VertexId>(std::min(u, v)),
                                    static_cast<VertexId>(std::max(u, v)));
          auto [it, inserted] = edge_map.emplace(key, w);
          if (!inserted && w < it->second) it->second = w;
        } else {
          throw ParseError(lineno, "unexpected keyword in Graph section: '" + toks[0] + "'");
        }
        break;
      }
      case Where::Terminals: {
        if (head == "end") {
          where = Where::TopLevel;
        } else if (head == "terminals") {
          if (toks.size() != 2) throw ParseError(lineno, "Terminals expects one value");
          declared_terminals = detail::parse_int(toks[1], lineno, "terminal count");
        } else if (head == "t") {
          if (toks.size() != 2) throw ParseError(lineno, "T expects one vertex id");
          long t = detail::parse_int(toks[1], lineno, "terminal id");
          if (nodes < 0) throw ParseError(lineno, "Terminals section before Graph");
          if (t < 1 || t > nodes)
            throw ParseError(lineno, "terminal is not a vertex: " + toks[1]);
          terminals.push_back(static_cast<VertexId>(t));
        } else {
          throw ParseError(lineno, "unexpected keyword in Terminals section: '" + toks[0] + "'");
        }
        break;
      }
    }
  }
  if (where != Where::TopLevel) throw ParseError(lineno, "unterminated section");
  if (!saw_graph) throw ParseError(lineno, "missing SECTION Graph");
  if (!saw_terminals) throw ParseError(lineno, "missing SECTION Terminals");
  if (nodes < 0) throw ParseError(graph_section_line, "missing Nodes line");
  if (declared_edges >= 0 && declared_edges != edge_lines)
    throw ParseError(graph_section_line,
                     "Edges declares " + std::to_string(declared_edges) + " but " +
                         std::to_string(edge_lines) + " E lines found");
  long distinct_terminals =
      static_cast<long>(std::set<VertexId>(terminals.begin(), terminals.end()).size());
  if (declared_terminals >= 0 && declared_terminals != distinct_terminals)
    throw ParseError(lineno, "Terminals declares " + std::to_string(declared_terminals) +
                                 " but " + std::to_string(distinct_terminals) + " distinct T lines found");
  if (terminals.empty()) throw ParseError(lineno, "terminal set is empty");

  std::vector<Edge> edges;
  edges.reserve(edge_map.size());
  for (const auto& [key, w] : edge_map) edges.push_back({key.first, key.second, w});
  try {
    Graph g(static_cast<int>(nodes), std::move(edges));
    return Instance(std::move(g), std::move(terminals), std::nullopt, name);
  } catch (const std::invalid_argument& e) {
    throw ParseError(graph_section_line, e.what());
  }
}

inline Instance parse_stp(const std::string& text) {
  std::istringstream ss(text);
  return parse_stp(ss);
}

namespace detail {

inline std::string format_length(double w) {
  long long as_int = static_cast<long long>(w);
  if (w == static_cast<double>(as_int)) return std::to_string(as_int);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", w);
  return buf;
}

}  // namespace detail

/// Canonical STP text: Comment, Graph, Terminals, EOF; edges sorted by
/// (u, v); integral lengths printed without a decimal point.
inline std::string emit_stp(const Instance& inst) {
  std::ostringstream out;
  out << "33D32945 STP File, STP Format Version 1.0\n\n";
  out << "SECTION Comment\n";
  if (!inst.name().empty()) out << "Name \"" << inst.name() << "\"\n";
  out << "END\n\n";
  out << "SECTION Graph\n";
  out << "Nodes " << inst.graph().vertex_count() << "\n";
  out << "Edges " << inst.graph().edge_count() << "\n";
  for (const Edge& e : inst.graph().edges())
    out << "E " << e.u << " " << e.v << " " << detail::format_length(e.length) << "\n";
  out << "END\n\n";
  out << "SECTION Terminals\n";
  out << "Terminals " << inst.terminal_count() << "\n";
  for (VertexId t : inst.terminals()) out << "T " << t << "\n";
  out << "END\n\n";
  out << "EOF\n";
  return out.str();
}

/// Parse `name,value` lines; `#` comments and blank lines are ignored.
inline OptimumRegistry load_optima(std::istream& in) {
  OptimumRegistry reg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    std::size_t comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(lineno, "expected 'name,value'");
    std::string name = line.substr(start, comma - start);
    while (!name.empty() && (name.back() == ' ' || name.back() == '\t')) name.pop_back();
    if (name.empty()) throw ParseError(lineno, "empty instance name");
    std::string value_str = line.substr(comma + 1);
    std::size_t vstart = value_str.find_first_not_of(" \t");
    if (vstart == std::string::npos) throw ParseError(lineno, "missing optimum value");
    std::size_t vend = value_str.find_last_not_of(" \t");
    double value = detail::parse_real(value_str.substr(vstart, vend - vstart + 1), lineno,
                                      "optimum value");
    if (!(value > 0.0)) throw ParseError(lineno, "optimum must be positive");
    if (!reg.entries.emplace(name, value).second)
      throw ParseError(lineno, "duplicate instance name: " + name);
  }
  return reg;
}

inline OptimumRegistry load_optima(const std::string& text) {
  std::istringstream ss(text);
  return load_optima(ss);
}

/// Load an instance from disk. The instance name is the file stem, and the
/// known optimum is attached from the registry when available.
inline Instance load_instance(const std::string& path, const OptimumRegistry* registry = nullptr) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Instance inst = parse_stp(in);
  std::string stem = path;
  if (auto slash = stem.find_last_of("/\\"); slash != std::string::npos) stem = stem.substr(slash + 1);
  if (auto dot = stem.rfind('.'); dot != std::string::npos) stem = stem.substr(0, dot);
  inst.set_name(stem);
  if (registry)
    if (auto opt = registry->lookup(stem)) inst.set_known_optimum(*opt);
  return inst;
}

inline OptimumRegistry load_optima_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_optima(in);
}

}  // namespace pst
