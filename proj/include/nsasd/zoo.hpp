#pragma once

// Constructors for the explicit metric families: each entry bundles a metric,
// a tetrad where one is known, the family's governing PDE residuals, and the
// set of geometric verdicts the family is expected to satisfy.

#include <map>
#include <optional>

#include "nsasd/spinor.hpp"

namespace nsasd {

struct NamedResidual {
  std::string name;
  double tolerance = 1e-8;
  std::function<double(std::span<const double>)> eval;
};

struct ExpectedVerdicts {
  bool asd = false;
  bool ricciFlat = false;
  bool scalarFlat = false;
  bool kahlerClosed = false;
  std::optional<PetrovType> petrov;
};

struct KillingData {
  std::array<ScalarField, 4> comp;
  bool isNull = false;
};

struct SampleResidual {
  std::string name;
  std::function<ResidualReport(std::span<const std::vector<double>>)> run;
};

struct ZooEntry {
  std::string name;
  MetricField metric;
  std::optional<TetradFrame> frame;
  std::vector<NamedResidual> governing;
  std::vector<SampleResidual> sampleResiduals;
  ExpectedVerdicts expected;
  std::array<std::array<ScalarField, 4>, 4> kahlerForm{};  // antisymmetric; optional
  bool hasKahlerForm = false;
  std::optional<KillingData> killing;
  std::map<std::string, ScalarField> params;

  void set_kahler(int a, int b, ScalarField f);
};

// Residual helper: |field| swept over samples.
NamedResidual field_residual(std::string name, double tol, ScalarField f);

// Laplace-Beltrami residual g^{ab}(f_ab - Gamma^c_ab f_c) of a scalar field.
double laplace_beltrami(const MetricField& g, const ScalarField& f,
                        std::span<const double> p);

// --- builders ---------------------------------------------------------------

ZooEntry build_flat();
ZooEntry build_g0();
ZooEntry build_heavenly1(const ScalarField& omega);           // chart (w,z,x,y)
ZooEntry build_heavenly2_nullkahler(const ScalarField& theta, // chart (w,z,x,y)
                                    bool einsteinBranch = false);
ZooEntry build_hyperhermitian(const ScalarField& theta0, const ScalarField& theta1);
ZooEntry build_sfk(const ScalarField& omega, const ScalarField& f);
ZooEntry build_ppwave(const ScalarField& Q);                  // chart (x,y,z,phi)
ZooEntry build_null_kv_nontwisting(const ScalarField& A1, const ScalarField& A2,
                                   const ScalarField& A3, const ScalarField& beta,
                                   const ScalarField& Q, const ScalarField& P);
ZooEntry build_null_kv_twisting(const ScalarField& A0, const ScalarField& A1,
                                const ScalarField& A2, const ScalarField& A3,
                                const ScalarField& G);
ZooEntry build_tod_sfk(const ScalarField& W, const ScalarField& etaX,
                       const ScalarField& etaY);              // chart (x,y,t,phi)
ZooEntry build_ooguri_vafa(double A, double B);               // chart (z1,z2,p1,p2)
ZooEntry build_twistor_example(const ScalarField& A, const ScalarField& B);
ZooEntry build_toda_lift();                                   // chart (x,y,t,phi)
ZooEntry build_dkp_lift(const ScalarField& H, const ScalarField& W);

// Pointwise 2x2 solve of the scalar-flat-Kahler gradient system for
// (f_{w^0}, f_{w^1}); the oracle counterpart of the symbolic residual.
std::array<double, 2> sfk_fgrad_oracle(const ScalarField& omega, std::span<const double> p);

// --- registry ---------------------------------------------------------------

struct EntrySpec {
  std::string name;
  // parameter name -> chart variable names accepted by the expression parser
  std::vector<std::pair<std::string, std::vector<std::string>>> params;
  std::map<std::string, std::string> defaults;  // parameter -> expression text
  std::function<ZooEntry(const std::map<std::string, ScalarField>&)> make;
  bool corruptViaMetric = false;  // family verdicts are potential-independent
};

const std::vector<EntrySpec>& zoo_registry();
const EntrySpec* find_entry_spec(const std::string& name);
ZooEntry make_default_entry(const EntrySpec& spec);
ZooEntry make_entry(const EntrySpec& spec,
                    const std::map<std::string, std::string>& overrides);

// Adds a generic size-eps bump to one parameter (or to a metric component when
// the family's verdicts do not depend on its potentials).
ZooEntry corrupted_entry(const EntrySpec& spec, const std::string& param, double eps);

// --- verification driver ----------------------------------------------------

struct VerifyOptions {
  int samples = 50;
  unsigned seed = 0;
  double tolAsd = 1e-8;
  double tolRicci = 1e-8;
  double tolScalar = 1e-8;
  double tolKahler = 1e-9;
  double tolKilling = 1e-8;
};

std::vector<ResidualReport> verify_entry(const ZooEntry& e, const VerifyOptions& opt);
bool all_pass(std::span<const ResidualReport> reports);

// Lie derivative of g along K minus its conformal part; zero for conformal
// Killing vectors.
double conformal_killing_residual(const MetricField& g, const KillingData& k,
                                  std::span<const double> p);
// max |(K ^ dK)_abc| with KK = g(K, .).
double twist_magnitude(const MetricField& g, const KillingData& k,
                       std::span<const double> p);

}  // namespace nsasd
