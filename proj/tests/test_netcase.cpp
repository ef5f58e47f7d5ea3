#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "gridsec/case_io.hpp"
#include "gridsec/network.hpp"
#include "gridsec/ptdf.hpp"
#include "support/dc_oracle.hpp"
#include "support/fixtures.hpp"

using namespace gridsec;

TEST_CASE("minimal JSON case parses with correct dimensions") {
  const net::Network n = fixtures::load("case3_triangle.json");
  CHECK(n.num_buses() == 3);
  CHECK(n.num_branches() == 3);
  CHECK(n.num_generators() == 1);
  CHECK(n.reference_bus_id() == 3);
  CHECK(n.bus(n.bus_index(2)).zero_injection);
  CHECK_FALSE(n.bus(n.bus_index(1)).zero_injection);
  CHECK_FALSE(n.bus(n.bus_index(3)).zero_injection);  // generator bus
}

TEST_CASE("duplicate bus id is rejected") {
  const std::string doc = R"({
    "schema": 1, "reference_bus": 1,
    "buses": [{"id": 1}, {"id": 1}],
    "branches": [{"from": 1, "to": 1, "x": 0.1}],
    "generators": []
  })";
  std::istringstream in(doc);
  CHECK_THROWS_WITH_AS(net::parse_case(in, net::CaseFormat::native_json),
                       doctest::Contains("duplicate bus id"), net::ValidationError);
}

TEST_CASE("disconnected network is rejected") {
  const std::string doc = R"({
    "schema": 1, "reference_bus": 1,
    "buses": [{"id": 1}, {"id": 2, "load": 5}, {"id": 3, "load": 5}],
    "branches": [{"from": 1, "to": 2, "x": 0.1}],
    "generators": [{"bus": 1, "p_max": 100, "cost": 1}]
  })";
  std::istringstream in(doc);
  CHECK_THROWS_WITH_AS(net::parse_case(in, net::CaseFormat::native_json),
                       doctest::Contains("not connected"), net::ValidationError);
}

TEST_CASE("insufficient generation capacity is rejected") {
  const std::string doc = R"({
    "schema": 1, "reference_bus": 1,
    "buses": [{"id": 1}, {"id": 2, "load": 500}],
    "branches": [{"from": 1, "to": 2, "x": 0.1}],
    "generators": [{"bus": 1, "p_max": 100, "cost": 1}]
  })";
  std::istringstream in(doc);
  CHECK_THROWS_WITH_AS(net::parse_case(in, net::CaseFormat::native_json),
                       doctest::Contains("below total forecast load"), net::ValidationError);
}

TEST_CASE("malformed JSON yields a parse error") {
  std::istringstream in("{ not json");
  CHECK_THROWS_AS(net::parse_case(in, net::CaseFormat::native_json), net::ParseError);
}

TEST_CASE("unsupported schema version is refused") {
  std::istringstream in(R"({"schema": 2, "buses": [], "branches": [], "generators": [],
                           "reference_bus": 1})");
  CHECK_THROWS_WITH_AS(net::parse_case(in, net::CaseFormat::native_json),
                       doctest::Contains("schema"), net::ParseError);
}

TEST_CASE("MATPOWER subset reader handles the documented columns") {
  const net::Network n = net::load_case(fixtures::path("case14a.m"));
  CHECK(n.num_buses() == 14);
  CHECK(n.num_branches() == 20);
  CHECK(n.num_generators() == 5);
  CHECK(n.reference_bus_id() == 1);
  CHECK(n.base_mva() == 100.0);
  CHECK(n.bus(n.bus_index(3)).forecast_load == doctest::Approx(94.2));
  CHECK(n.branch(0).rating == doctest::Approx(120.0));
  CHECK_FALSE(n.branch(1).rated());  // RATE_A = 0 means unlimited
  CHECK(n.generator(0).cost == doctest::Approx(20.0));
  CHECK(n.generator(0).p_max == doctest::Approx(332.0));
}

TEST_CASE("MATPOWER reader drops out-of-service branches and flags bad rows") {
  std::istringstream good(R"(function mpc = t
mpc.baseMVA = 100;
mpc.bus = [ 1 3 0 0 0 0 1 1 0 0 1 1.1 0.9; 2 1 10 0 0 0 1 1 0 0 1 1.1 0.9; ];
mpc.gen = [ 1 0 0 0 0 1 100 1 50 0; ];
mpc.branch = [ 1 2 0 0.1 0 0 0 0 0 0 1; 1 2 0 0.2 0 0 0 0 0 0 0; ];
mpc.gencost = [ 2 0 0 2 7 0; ];
)");
  const net::Network n = net::parse_case(good, net::CaseFormat::matpower_m);
  CHECK(n.num_branches() == 1);  // second is out of service
  CHECK(n.generator(0).cost == doctest::Approx(7.0));

  std::istringstream bad(R"(function mpc = t
mpc.bus = [ 1 3 zz; ];
)");
  CHECK_THROWS_WITH_AS(net::parse_case(bad, net::CaseFormat::matpower_m),
                       doctest::Contains("line"), net::ParseError);
}

TEST_CASE("quadratic gencost is linearized at the midpoint and logged") {
  std::istringstream in(R"(function mpc = t
mpc.baseMVA = 100;
mpc.bus = [ 1 3 0 0 0 0 1 1 0 0 1 1.1 0.9; 2 1 10 0 0 0 1 1 0 0 1 1.1 0.9; ];
mpc.gen = [ 1 0 0 0 0 1 100 1 100 20; ];
mpc.branch = [ 1 2 0 0.1 0 0 0 0 0 0 1; ];
mpc.gencost = [ 2 0 0 3 0.02 10 5; ];
)");
  std::vector<std::string> notes;
  const net::Network n = net::parse_case(in, net::CaseFormat::matpower_m, &notes);
  // slope of 0.02 p^2 + 10 p at p = (20+100)/2: 10 + 0.02*120
  CHECK(n.generator(0).cost == doctest::Approx(10.0 + 0.02 * 120.0));
  REQUIRE(notes.size() == 1);
  CHECK(notes[0].find("linearized") != std::string::npos);
}

TEST_CASE("native JSON round-trip preserves the model") {
  const net::Network a = fixtures::load("case5.json");
  std::stringstream buf;
  net::write_case_json(a, buf);
  const net::Network b = net::parse_case(buf, net::CaseFormat::native_json);
  CHECK(a.num_buses() == b.num_buses());
  CHECK(a.num_branches() == b.num_branches());
  CHECK(a.num_generators() == b.num_generators());
  CHECK(net::case_fingerprint(a) == net::case_fingerprint(b));
}

TEST_CASE("matpower writer round-trips through the reader") {
  const net::Network a = fixtures::load("case5.json");
  std::stringstream buf;
  net::write_case_m(a, buf);
  const net::Network b = net::parse_case(buf, net::CaseFormat::matpower_m);
  CHECK(net::case_fingerprint(a) == net::case_fingerprint(b));
}

// --- PTDF -------------------------------------------------------------------

TEST_CASE("radial line carries the whole injection") {
  const net::Network n = fixtures::load("case2_radial.json");
  const net::PtdfMatrix ptdf = net::compute_ptdf(n);
  CHECK(ptdf(0, n.bus_index(2)) == doctest::Approx(1.0));  // injection at 2 flows 2->1
  CHECK(ptdf(0, n.bus_index(1)) == 0.0);                   // reference column
}

TEST_CASE("triangle PTDF matches the hand-derived values") {
  const net::Network n = fixtures::load("case3_triangle.json");
  const net::PtdfMatrix ptdf = net::compute_ptdf(n);
  const int b1 = n.bus_index(1);
  // inject at bus 1, withdraw at reference bus 3
  CHECK(ptdf(0, b1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));  // branch 1-2
  CHECK(ptdf(1, b1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));  // branch 1-3
  CHECK(ptdf(2, b1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));  // branch 2-3
  for (int k = 0; k < 3; ++k) CHECK(ptdf(k, n.reference_index()) == 0.0);
}

TEST_CASE("superposition: PTDF flows equal a direct DC solve") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 8; ++trial) {
    const net::Network n = fixtures::random_network(rng, 12 + trial * 3);
    const net::PtdfMatrix ptdf = net::compute_ptdf(n);
    // random zero-sum injection vector
    Eigen::VectorXd inj(n.num_buses());
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int i = 0; i < n.num_buses(); ++i) inj[i] = u(rng);
    inj[n.reference_index()] -= inj.sum();

    const Eigen::VectorXd via_ptdf = ptdf.flows(inj);
    const Eigen::VectorXd direct = oracle::dc_branch_flows(n, inj);
    const double scale = std::max(1.0, direct.cwiseAbs().maxCoeff());
    CHECK((via_ptdf - direct).cwiseAbs().maxCoeff() / scale < 1e-8);
  }
}

TEST_CASE("PTDF entries are bounded by one and the reference column is zero") {
  std::mt19937_64 rng(7);
  const net::Network n = fixtures::random_network(rng, 25);
  const net::PtdfMatrix ptdf = net::compute_ptdf(n);
  CHECK(ptdf.values().cwiseAbs().maxCoeff() <= 1.0 + 1e-9);
  CHECK(ptdf.values().col(n.reference_index()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("PTDF is invariant to uniform reactance scaling") {
  const net::Network a = fixtures::load("case5.json");
  std::vector<net::Bus> buses = a.buses();
  std::vector<net::Branch> branches = a.branches();
  std::vector<net::Generator> gens = a.generators();
  for (auto& br : branches) br.reactance *= 3.7;
  const net::Network b(buses, branches, gens, a.reference_bus_id());
  const net::PtdfMatrix pa = net::compute_ptdf(a);
  const net::PtdfMatrix pb = net::compute_ptdf(b);
  CHECK((pa.values() - pb.values()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("ring stays valid when a non-bridge branch is removed") {
  // ring of 6: removing any single branch keeps the network connected
  std::vector<net::Bus> buses(6);
  std::vector<net::Generator> gens(1);
  for (int i = 0; i < 6; ++i) {
    buses[i].id = i + 1;
    buses[i].forecast_load = i == 0 ? 0.0 : 5.0;
  }
  gens[0] = {1, 1, 0.0, 100.0, 10.0};
  std::vector<net::Branch> ring;
  for (int i = 0; i < 6; ++i) {
    ring.push_back({i + 1, i + 1, (i + 1) % 6 + 1, 0.1, net::kUnlimitedRating});
  }
  for (int drop = 0; drop < 6; ++drop) {
    std::vector<net::Branch> reduced;
    for (int k = 0; k < 6; ++k) {
      if (k != drop) reduced.push_back(ring[k]);
    }
    CHECK_NOTHROW(net::Network(buses, reduced, gens, 1));
    // removing a second branch disconnects the chain
    std::vector<net::Branch> broken(reduced.begin() + 1, reduced.end());
    CHECK_THROWS_AS(net::Network(buses, broken, gens, 1), net::ValidationError);
  }
}
