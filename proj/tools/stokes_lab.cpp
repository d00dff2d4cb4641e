// Copyright 2026 The Stokes Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// stokes_lab: state generation, profile meshes, simulated tomography,
// verification suites and central factorial tables.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "stokes/factorials.hpp"
#include "stokes/menagerie.hpp"
#include "stokes/moments.hpp"
#include "stokes/serialize.hpp"
#include "stokes/tomography.hpp"
#include "stokes/verify.hpp"

namespace {

using namespace stokes;

struct StateFlags {
  std::string family;
  std::optional<int> n, m, nmax, mmax;
  std::optional<double> nbar, theta, phi, xi, a;
};

void add_state_flags(CLI::App* app, StateFlags& f) {
  app->add_option("--n", f.n, "photon number N");
  app->add_option("--m", f.m, "photons per mode (twin-Fock)");
  app->add_option("--nbar", f.nbar, "mean photon number");
  app->add_option("--nmax", f.nmax, "photon-number truncation (coherent)");
  app->add_option("--mmax", f.mmax, "pair-number truncation (tmsv)");
  app->add_option("--theta", f.theta, "polar angle or mixing angle, radians");
  app->add_option("--phi", f.phi, "azimuth, radians");
  app->add_option("--xi", f.xi, "third Euler angle, radians");
  app->add_option("--a", f.a, "amplitude a of the unpolarized two-photon state");
}

template <class T>
T need(const std::optional<T>& v, const char* flag, const std::string& family) {
  if (!v) throw std::invalid_argument(family + " needs " + flag);
  return *v;
}

struct BuiltState {
  BlockDiagonalState state;
  Json description;
};

BuiltState build_state(const StateFlags& f) {
  const std::string& fam = f.family;
  Json params = Json::object();
  auto single = [&](ManifoldState s) { return BlockDiagonalState::single(std::move(s)); };
  if (fam.size() > 5 && fam.substr(fam.size() - 5) == ".json") {
    std::ifstream in(fam);
    if (!in) throw std::invalid_argument("cannot open state file " + fam);
    const Json j = Json::parse(in);
    return {state_from_json(j), Json{{"type", j.value("type", "file")}, {"params", j.value("params", Json::object())}}};
  }
  if (fam == "su2_coherent") {
    const int N = need(f.n, "--n", fam);
    const double th = f.theta.value_or(0.0), ph = f.phi.value_or(0.0);
    params = {{"N", N}, {"theta", th}, {"phi", ph}};
    return {single(su2_coherent(N, th, ph)), params};
  }
  if (fam == "coherent") {
    const double nbar = need(f.nbar, "--nbar", fam);
    const int nmax = f.nmax.value_or(32);
    params = {{"nbar", nbar}, {"nmax", nmax}};
    return {two_mode_coherent(nbar, nmax), params};
  }
  if (fam == "twin_fock") {
    int m;
    if (f.m) {
      m = *f.m;
    } else {
      const int N = need(f.n, "--m or an even --n", fam);
      if (N % 2) throw std::invalid_argument("twin_fock needs an even --n");
      m = N / 2;
    }
    params = {{"m", m}};
    if (f.theta || f.phi || f.xi) {
      const EulerAngles e{f.phi.value_or(0.0), f.theta.value_or(0.0), f.xi.value_or(0.0)};
      params["angles"] = {e.phi, e.theta, e.xi};
      return {single(transformed_twin_fock(m, e)), params};
    }
    return {single(twin_fock(m)), params};
  }
  if (fam == "tmsv") {
    const double nbar = need(f.nbar, "--nbar", fam);
    const int mmax = f.mmax.value_or(16);
    params = {{"nbar", nbar}, {"mmax", mmax}};
    return {polarization_sector(tmsv(nbar, {}, mmax)), params};
  }
  if (fam == "noon") {
    const int N = need(f.n, "--n", fam);
    params = {{"N", N}};
    return {single(noon(N)), params};
  }
  if (fam == "unpolarized_two_photon") {
    const double a = need(f.a, "--a", fam);
    const double th = f.theta.value_or(0.0);
    params = {{"a", a}, {"theta", th}};
    return {single(unpolarized_two_photon(a, th)), params};
  }
  throw std::invalid_argument("unknown state '" + fam +
                              "' (su2_coherent, coherent, twin_fock, tmsv, noon, unpolarized_two_photon, or a .json file)");
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::pair<int, int> parse_mesh(const std::string& spec) {
  const auto x = spec.find('x');
  if (x == std::string::npos) throw std::invalid_argument("--mesh expects THETAxPHI, e.g. 181x361");
  const int nt = std::stoi(spec.substr(0, x));
  const int np = std::stoi(spec.substr(x + 1));
  if (nt < 2 || np < 2) throw std::invalid_argument("--mesh needs at least 2 points per axis");
  return {nt, np};
}

int cmd_state(const StateFlags& f, const std::string& out) {
  const BuiltState b = build_state(f);
  emit(out, state_to_json(b.state, f.family, b.description).dump(2) + "\n");
  return 0;
}

int cmd_profile(const StateFlags& f, int order, const std::string& mesh, const std::string& out) {
  if (order < 0 || order > kMaxTensorOrder) {
    throw std::invalid_argument("--order must be between 0 and " + std::to_string(kMaxTensorOrder));
  }
  const BuiltState b = build_state(f);
  const auto [nt, np] = parse_mesh(mesh);
  std::vector<std::pair<double, MomentComponents>> parts;
  for (const auto& blk : b.state.blocks()) {
    parts.push_back({blk.probability, moment_components(tensor(blk.state, order))});
  }
  std::vector<double> thetas(nt), phis(np), values;
  for (int i = 0; i < nt; ++i) thetas[i] = M_PI * i / (nt - 1);
  for (int j = 0; j < np; ++j) phis[j] = 2.0 * M_PI * j / (np - 1);
  values.reserve(static_cast<std::size_t>(nt) * np);
  for (double th : thetas) {
    for (double ph : phis) {
      const Direction n = Direction::from_angles(th, ph);
      double v = 0.0;
      for (const auto& [p, m] : parts) v += p * profile_eval(m, n);
      values.push_back(v);
    }
  }
  std::ostringstream os;
  if (ends_with(out, ".json")) {
    Json j{{"order", order}, {"state", b.description}, {"mesh", {nt, np}}, {"theta", thetas}, {"phi", phis},
           {"values", values}};
    os << j.dump() << "\n";
  } else {
    os << "theta,phi,value\n";
    std::size_t idx = 0;
    for (double th : thetas) {
      for (double ph : phis) {
        os << format_double(th) << ',' << format_double(ph) << ',' << format_double(values[idx++]) << '\n';
      }
    }
  }
  emit(out, os.str());
  return 0;
}

int cmd_tomography(const StateFlags& f, const std::string& shots, std::uint64_t seed, const std::string& dirs,
                   const std::string& out) {
  const BuiltState b = build_state(f);
  TomographyOptions opts;
  opts.seed = seed;
  if (shots != "inf") {
    std::size_t used = 0;
    const unsigned long long n = std::stoull(shots, &used);
    if (used != shots.size() || n == 0) throw std::invalid_argument("--shots must be a positive integer or inf");
    opts.shots = n;
  }
  if (dirs == "symmetric") {
    opts.symmetric_third_order = true;
  } else if (dirs != "default") {
    throw std::invalid_argument("--directions must be 'default' or 'symmetric'");
  }
  const ReconstructionResult res = run_tomography(b.state, opts);
  Json j = to_json(res);
  j["state"] = b.description;
  j["shots"] = shots == "inf" ? Json("inf") : Json(*opts.shots);
  j["seed"] = seed;
  bool physical = true;
  for (auto& m : j["manifolds"]) {
    const auto* truth = b.state.find(m["N"].get<int>());
    const auto it = std::find_if(res.manifolds.begin(), res.manifolds.end(),
                                 [&](const ManifoldReconstruction& r) { return r.N == m["N"].get<int>(); });
    m["trace_distance_to_truth"] = trace_distance(it->density->state.density(), truth->density());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(it->density->state.density(), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-12) physical = false;
  }
  emit(out, j.dump(2) + "\n");
  return physical ? 0 : 4;
}

int cmd_verify(const std::string& suite) {
  const SuiteReport r = run_suite(suite);
  for (const auto& c : r.checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) std::cout << "  [" << c.detail << "]";
    std::cout << "\n";
  }
  std::cout << "suite " << r.suite << ": " << (r.passed() ? "passed" : "FAILED") << "\n";
  return r.passed() ? 0 : 1;
}

int cmd_factorials(const std::string& kind, const std::string& out) {
  if (kind != "f" && kind != "F") throw std::invalid_argument("--kind must be f or F");
  emit(out, central_factorial_csv(central_factorials(), kind == "F"));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Higher-order Stokes moments and polarization tomography"};
  app.require_subcommand(1);

  StateFlags state_flags;
  std::string out, mesh = "181x361", shots = "inf", directions = "default", suite, kind = "f";
  int order = 1;
  std::uint64_t seed = 0;

  auto* state = app.add_subcommand("state", "Write a state as JSON");
  state->add_option("family", state_flags.family, "state family")->required();
  add_state_flags(state, state_flags);
  state->add_option("--out", out, "output file (.json)");

  auto* profile = app.add_subcommand("profile", "Stokes moment profile on a (theta, phi) mesh");
  profile->add_option("--state", state_flags.family, "state family or JSON file")->required();
  add_state_flags(profile, state_flags);
  profile->add_option("--order", order, "moment order r")->required();
  profile->add_option("--mesh", mesh, "THETAxPHI grid, poles included")->capture_default_str();
  profile->add_option("--out", out, "output file (.csv or .json)");

  auto* tomo = app.add_subcommand("tomography", "Simulated photon-number-resolved tomography");
  tomo->add_option("--state", state_flags.family, "state family or JSON file")->required();
  add_state_flags(tomo, state_flags);
  tomo->add_option("--shots", shots, "shots per setting, or inf for exact moments")->capture_default_str();
  tomo->add_option("--seed", seed, "sampling seed")->capture_default_str();
  tomo->add_option("--directions", directions, "third-order set: default or symmetric")->capture_default_str();
  tomo->add_option("--out", out, "output file (.json)");

  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  verify->add_option("suite", suite, "algebra, profiles, recurrence, factorials or tomography")->required();

  auto* fact = app.add_subcommand("factorials", "Central factorial numbers as CSV");
  fact->add_option("--kind", kind, "f (first kind) or F (second kind)")->capture_default_str();
  fact->add_option("--out", out, "output file (.csv)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*state) return cmd_state(state_flags, out);
    if (*profile) return cmd_profile(state_flags, order, mesh, out);
    if (*tomo) return cmd_tomography(state_flags, shots, seed, directions, out);
    if (*verify) return cmd_verify(suite);
    if (*fact) return cmd_factorials(kind, out);
  } catch (const RankDeficientDesign& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
