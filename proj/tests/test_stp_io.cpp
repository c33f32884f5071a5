#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "pst/stp_io.hpp"

using namespace pst;

namespace {

const std::string kMinimal =
    "SECTION Graph\n"
    "Nodes 2\n"
    "Edges 1\n"
    "E 1 2 5\n"
    "END\n"
    "SECTION Terminals\n"
    "Terminals 2\n"
    "T 1\n"
    "T 2\n"
    "END\n"
    "EOF\n";

std::string data_path(const std::string& rel) { return std::string(PST_DATA_DIR) + "/" + rel; }

}  // namespace

TEST_CASE("minimal instance parses") {
  Instance inst = parse_stp(kMinimal);
  CHECK(inst.graph().vertex_count() == 2);
  REQUIRE(inst.graph().edge_count() == 1);
  CHECK(inst.graph().edge(0).length == 5.0);
  CHECK(inst.terminals() == std::vector<VertexId>{1, 2});
}

TEST_CASE("b01 has the published shape") {
  std::ifstream in(data_path("b/b01.stp"));
  REQUIRE(in.good());
  Instance inst = parse_stp(in);
  CHECK(inst.graph().vertex_count() == 50);
  CHECK(inst.graph().edge_count() == 63);
  CHECK(inst.terminal_count() == 9);
}

TEST_CASE("emit produces one canonical edge line") {
  Instance inst = parse_stp(kMinimal);
  std::string text = emit_stp(inst);
  CHECK(text.find("E 1 2 5\n") != std::string::npos);
  CHECK(text.find("E 1 2 5") == text.rfind("E 1 2 5"));
  CHECK(text.find("SECTION Graph") != std::string::npos);
  CHECK(text.rfind("EOF\n") == text.size() - 4);
}

TEST_CASE("emit then parse is the identity") {
  std::ifstream in(data_path("b/b01.stp"));
  Instance inst = parse_stp(in);
  Instance again = parse_stp(emit_stp(inst));
  CHECK(structurally_equal(inst, again));
  CHECK(again.terminal_count() == 9);
  // a second round trip is byte-stable
  CHECK(emit_stp(again) == emit_stp(inst));
}

TEST_CASE("round trip on random instances") {
  std::mt19937_64 rng(47);
  for (int round = 0; round < 20; ++round) {
    Graph g = oracles::random_connected_graph(rng, 12, 1.0);
    auto terminals = oracles::random_terminals(rng, 12, 4);
    Instance inst(g, terminals, std::nullopt, "rand");
    CHECK(structurally_equal(inst, parse_stp(emit_stp(inst))));
  }
}

TEST_CASE("mixed-case keywords and unknown sections are tolerated") {
  std::string text =
      "33d32945 STP File, STP Format Version  1.00\n"
      "Section Comment\n"
      "Name    \"toy\"\n"
      "End\n"
      "Section Graph\n"
      "Nodes 2\n"
      "Edges 1\n"
      "E 1 2 7\n"
      "End\n"
      "Section Coordinates\n"
      "DD 1 0 0\n"
      "End\n"
      "Section Terminals\n"
      "Terminals 1\n"
      "T 2\n"
      "End\n"
      "EOF\n";
  Instance inst = parse_stp(text);
  CHECK(inst.name() == "toy");
  CHECK(inst.graph().edge(0).length == 7.0);
  CHECK(inst.terminals() == std::vector<VertexId>{2});
}

TEST_CASE("parallel edges collapse to the minimum length") {
  std::string text =
      "SECTION Graph\nNodes 2\nEdges 3\nE 1 2 5\nE 2 1 3\nE 1 2 9\nEND\n"
      "SECTION Terminals\nTerminals 2\nT 1\nT 2\nEND\nEOF\n";
  Instance inst = parse_stp(text);
  REQUIRE(inst.graph().edge_count() == 1);
  CHECK(inst.graph().edge(0).length == 3.0);
}

TEST_CASE("parse errors carry line numbers") {
  auto line_of = [](const std::string& text) {
    try {
      parse_stp(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };

  SECTION("missing Graph section") {
    CHECK_THROWS_WITH(parse_stp("SECTION Terminals\nTerminals 1\nT 1\nEND\nEOF\n"),
                      Catch::Matchers::ContainsSubstring("Terminals section before Graph"));
  }
  SECTION("missing Terminals section") {
    CHECK_THROWS_WITH(parse_stp("SECTION Graph\nNodes 1\nEdges 0\nEND\nEOF\n"),
                      Catch::Matchers::ContainsSubstring("missing SECTION Terminals"));
  }
  SECTION("non-positive weight") {
    std::string text =
        "SECTION Graph\nNodes 2\nEdges 1\nE 1 2 0\nEND\n"
        "SECTION Terminals\nTerminals 1\nT 1\nEND\nEOF\n";
    CHECK_THROWS_WITH(parse_stp(text), Catch::Matchers::ContainsSubstring("non-positive"));
    CHECK(line_of(text) == 4);
  }
  SECTION("vertex id out of range") {
    std::string text =
        "SECTION Graph\nNodes 2\nEdges 1\nE 1 7 2\nEND\n"
        "SECTION Terminals\nTerminals 1\nT 1\nEND\nEOF\n";
    CHECK(line_of(text) == 4);
  }
  SECTION("terminal is not a vertex") {
    std::string text =
        "SECTION Graph\nNodes 2\nEdges 1\nE 1 2 2\nEND\n"
        "SECTION Terminals\nTerminals 1\nT 9\nEND\nEOF\n";
    CHECK(line_of(text) == 8);
  }
  SECTION("disconnected graph") {
    std::string text =
        "SECTION Graph\nNodes 4\nEdges 2\nE 1 2 1\nE 3 4 1\nEND\n"
        "SECTION Terminals\nTerminals 2\nT 1\nT 3\nEND\nEOF\n";
    CHECK_THROWS_WITH(parse_stp(text), Catch::Matchers::ContainsSubstring("disconnected"));
  }
  SECTION("declared edge count mismatch") {
    std::string text =
        "SECTION Graph\nNodes 2\nEdges 2\nE 1 2 1\nEND\n"
        "SECTION Terminals\nTerminals 1\nT 1\nEND\nEOF\n";
    CHECK_THROWS_WITH(parse_stp(text), Catch::Matchers::ContainsSubstring("Edges declares"));
  }
}

TEST_CASE("single-token corruptions that break invariants are rejected") {
  std::ifstream in(data_path("b/b01.stp"));
  std::string valid((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  REQUIRE_NOTHROW(parse_stp(valid));

  std::mt19937_64 rng(48);
  int rejected = 0;
  for (int round = 0; round < 100; ++round) {
    std::istringstream ss(valid);
    std::ostringstream corrupted;
    std::string line;
    int target = 1 + static_cast<int>(rng() % 120);
    int lineno = 0;
    bool mutated = false;
    while (std::getline(ss, line)) {
      ++lineno;
      auto toks = line.substr(0, 2);
      if (lineno >= target && !mutated && toks == "E ") {
        std::istringstream ls(line);
        std::string e, u, v, w;
        ls >> e >> u >> v >> w;
        switch (rng() % 4) {
          case 0: w = "0"; break;                  // zero weight
          case 1: w = "-3"; break;                 // negative weight
          case 2: v = u; break;                    // self-loop
          case 3: v = "999"; break;                // out of range
        }
        line = e + " " + u + " " + v + " " + w;
        mutated = true;
      } else if (lineno >= target && !mutated && toks == "T ") {
        line = "T 0";
        mutated = true;
      }
      corrupted << line << "\n";
    }
    if (!mutated) continue;
    try {
      parse_stp(corrupted.str());
    } catch (const ParseError&) {
      ++rejected;
      continue;
    }
    FAIL("corruption accepted");
  }
  CHECK(rejected > 50);
}

TEST_CASE("optimum registry") {
  SECTION("bundled registry holds the b01 value") {
    OptimumRegistry reg = load_optima_file(data_path("optima.csv"));
    REQUIRE(reg.lookup("b01"));
    CHECK(*reg.lookup("b01") == 82.0);
    CHECK(reg.lookup("nonexistent") == std::nullopt);
  }
  SECTION("empty input gives an empty registry") {
    CHECK(load_optima("").entries.empty());
    CHECK(load_optima("# just a comment\n\n").entries.empty());
  }
  SECTION("duplicates are rejected with the line") {
    try {
      load_optima("b01,82\nb01,83\n");
      FAIL("duplicate accepted");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }
  SECTION("non-numeric value is rejected") {
    CHECK_THROWS_AS(load_optima("b01,eighty\n"), ParseError);
  }
}

TEST_CASE("load_instance names by stem and attaches the optimum") {
  OptimumRegistry reg = load_optima_file(data_path("optima.csv"));
  Instance inst = load_instance(data_path("b/b01.stp"), &reg);
  CHECK(inst.name() == "b01");
  REQUIRE(inst.known_optimum());
  CHECK(*inst.known_optimum() == 82.0);
}
