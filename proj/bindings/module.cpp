// Python bindings: the main operations of the library, with exact rationals
// crossing the boundary as fractions.Fraction.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spinobs/criticality.hpp"
#include "spinobs/exact.hpp"
#include "spinobs/gadgets.hpp"
#include "spinobs/interpolate.hpp"
#include "spinobs/phase.hpp"
#include "spinobs/reduction.hpp"
#include "spinobs/sampler.hpp"

namespace py = pybind11;
using namespace spinobs;

namespace pybind11 {
namespace detail {

template <>
struct type_caster<Rat> {
  public:
    PYBIND11_TYPE_CASTER(Rat, const_name("Fraction"));

    bool load(handle src, bool) {
        if (src.is_none()) return false;
        try {
            object fraction = module_::import("fractions").attr("Fraction");
            object f = isinstance(src, fraction) ? reinterpret_borrow<object>(src) : fraction(src);
            std::string s = str(f.attr("numerator")).cast<std::string>() + "/" +
                            str(f.attr("denominator")).cast<std::string>();
            value = parse_rational(s);
            return true;
        } catch (...) {
            return false;
        }
    }

    static handle cast(const Rat& v, return_value_policy, handle) {
        object fraction = module_::import("fractions").attr("Fraction");
        return fraction(to_string(v)).release();
    }
};

template <>
struct type_caster<Int> {
  public:
    PYBIND11_TYPE_CASTER(Int, const_name("int"));
    bool load(handle src, bool) {
        if (!isinstance<int_>(src)) return false;
        value = Int(str(src).cast<std::string>());
        return true;
    }
    static handle cast(const Int& v, return_value_policy, handle) {
        return PyLong_FromString(v.get_str().c_str(), nullptr, 10);
    }
};

}  // namespace detail
}  // namespace pybind11

namespace {

template <typename T>
std::vector<const T*> as_pointers(const std::vector<T>& xs) {
    std::vector<const T*> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(&x);
    return out;
}

}  // namespace

PYBIND11_MODULE(_spinobs, m) {
    m.doc() = "gadget algebra and counting-to-observables reductions for Gibbs distributions";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<BudgetError>(m, "BudgetError", PyExc_RuntimeError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    // ---- graphs ----
    py::class_<Multigraph>(m, "Multigraph")
        .def(py::init<int>(), py::arg("n") = 0)
        .def("add_vertex", &Multigraph::add_vertex)
        .def("add_edge", &Multigraph::add_edge)
        .def("set_edge_activity", &Multigraph::set_edge_activity)
        .def("set_vertex_activity", &Multigraph::set_vertex_activity)
        .def_property_readonly("vertex_count", &Multigraph::vertex_count)
        .def_property_readonly("edge_count", &Multigraph::edge_count)
        .def_property_readonly("edges", [](const Multigraph& g) { return g.edges(); })
        .def("degrees", &Multigraph::degrees)
        .def("is_forest", &Multigraph::is_forest)
        .def("is_connected", &Multigraph::is_connected)
        .def("bipartition", &Multigraph::bipartition)
        .def("to_edge_list", &Multigraph::to_edge_list)
        .def_static("from_edge_list", &Multigraph::from_edge_list_string)
        .def_static("from_file", &Multigraph::from_edge_list_file)
        .def("__repr__", [](const Multigraph& g) {
            return "Multigraph(n=" + std::to_string(g.vertex_count()) +
                   ", m=" + std::to_string(g.edge_count()) + ")";
        });
    m.def("path_graph", &path_graph);
    m.def("cycle_graph", &cycle_graph);
    m.def("complete_graph", &complete_graph);
    m.def("complete_bipartite", &complete_bipartite);
    m.def("k2", &k2);
    m.def("single_vertex", &single_vertex);

    // ---- models ----
    py::class_<PottsParams>(m, "PottsParams")
        .def(py::init<int, Rat>(), py::arg("q"), py::arg("beta"))
        .def_readonly("q", &PottsParams::q)
        .def_readonly("beta", &PottsParams::beta);
    py::class_<TwoSpinParams>(m, "TwoSpinParams")
        .def(py::init<Rat, Rat, Rat>(), py::arg("beta"), py::arg("gamma"), py::arg("lambda_"))
        .def_readonly("beta", &TwoSpinParams::beta)
        .def_readonly("gamma", &TwoSpinParams::gamma)
        .def_readonly("lambda_", &TwoSpinParams::lambda)
        .def("antiferromagnetic", &TwoSpinParams::antiferromagnetic);
    m.def("hardcore", &hardcore, py::arg("lambda_"));
    m.def("ising", &ising, py::arg("edge_activity"), py::arg("lambda_"));

    py::class_<VertexEdgeObservable>(m, "VertexEdgeObservable")
        .def(py::init<Rat, Rat, Rat>(), py::arg("a"), py::arg("b"), py::arg("c"))
        .def_readonly("a", &VertexEdgeObservable::a)
        .def_readonly("b", &VertexEdgeObservable::b)
        .def_readonly("c", &VertexEdgeObservable::c)
        .def("trivial_on_general", &VertexEdgeObservable::trivial_on_general)
        .def("trivial_on_bipartite", &VertexEdgeObservable::trivial_on_bipartite);
    m.def("magnetization", &magnetization);
    m.def("susceptibility", &susceptibility_obs);

    py::class_<PinSet>(m, "PinSet")
        .def(py::init<>())
        .def("pin", &PinSet::pin, py::return_value_policy::reference_internal)
        .def("equal_spins", &PinSet::equal_spins, py::return_value_policy::reference_internal)
        .def("distinct_spins", &PinSet::distinct_spins,
             py::return_value_policy::reference_internal);

    py::class_<EnumOptions>(m, "EnumOptions")
        .def(py::init([](uint64_t max_configs, int threads) {
                 return EnumOptions{max_configs, threads};
             }),
             py::arg("max_configs") = (uint64_t(1) << 25), py::arg("threads") = 1)
        .def_readwrite("max_configs", &EnumOptions::max_configs)
        .def_readwrite("threads", &EnumOptions::threads);

    // ---- exact ----
    py::class_<ConfigStatsResult>(m, "ConfigStats")
        .def_readonly("size", &ConfigStatsResult::size)
        .def_readonly("mono", &ConfigStatsResult::mono)
        .def_readonly("m0", &ConfigStatsResult::m0)
        .def_readonly("m1", &ConfigStatsResult::m1)
        .def_readonly("weight", &ConfigStatsResult::weight);
    m.def("config_stats", &config_stats);
    m.def("partition_function", &partition_function, py::arg("graph"), py::arg("model"),
          py::arg("options") = EnumOptions{});
    m.def("restricted_partition_function", &restricted_partition_function, py::arg("graph"),
          py::arg("model"), py::arg("pins"), py::arg("options") = EnumOptions{});
    m.def("gibbs_probability", &gibbs_probability, py::arg("graph"), py::arg("model"),
          py::arg("event"), py::arg("options") = EnumOptions{});
    m.def("observable_expectation", &observable_expectation, py::arg("graph"), py::arg("model"),
          py::arg("observable"), py::arg("pins") = PinSet{},
          py::arg("subgraph") = std::optional<SubgraphRef>{}, py::arg("options") = EnumOptions{});
    m.def("independent_set_polynomial", &independent_set_polynomial, py::arg("graph"),
          py::arg("lambda_"), py::arg("options") = EnumOptions{});
    py::class_<SubgraphRef>(m, "SubgraphRef")
        .def(py::init([](std::vector<int> vs, std::vector<int> es) {
                 SubgraphRef f;
                 f.vertices = std::move(vs);
                 f.edge_indices = std::move(es);
                 return f;
             }),
             py::arg("vertices"), py::arg("edge_indices"));

    // ---- criticality ----
    m.def("potts_beta_c", &potts_beta_c);
    m.def("hardcore_lambda_c", &hardcore_lambda_c);
    py::class_<PortBias>(m, "PortBias")
        .def_readonly("x", &PortBias::x)
        .def_readonly("p", &PortBias::p)
        .def_readonly("residual", &PortBias::residual)
        .def_readonly("exact_x", &PortBias::exact_x)
        .def_readonly("exact_p", &PortBias::exact_p);
    m.def("potts_port_bias", &potts_port_bias);
    py::enum_<UniquenessVerdict>(m, "UniquenessVerdict")
        .value("Uniqueness", UniquenessVerdict::Uniqueness)
        .value("NonUniqueness", UniquenessVerdict::NonUniqueness)
        .value("Boundary", UniquenessVerdict::Boundary);
    py::class_<UniquenessReport>(m, "UniquenessReport")
        .def_readonly("x_star", &UniquenessReport::x_star)
        .def_readonly("derivative_magnitude", &UniquenessReport::derivative_magnitude)
        .def_readonly("in_nonuniqueness", &UniquenessReport::in_nonuniqueness)
        .def_readonly("verdict", &UniquenessReport::verdict)
        .def_readonly("residual", &UniquenessReport::residual);
    m.def("twospin_uniqueness", &twospin_uniqueness, py::arg("params"), py::arg("delta"),
          py::arg("guard_band") = 1e-9);
    py::class_<BranchMarginals>(m, "BranchMarginals")
        .def_readonly("x", &BranchMarginals::x)
        .def_readonly("y", &BranchMarginals::y)
        .def_readonly("q_plus", &BranchMarginals::q_plus)
        .def_readonly("q_minus", &BranchMarginals::q_minus)
        .def_readonly("residual", &BranchMarginals::residual)
        .def_readonly("degenerate", &BranchMarginals::degenerate);
    m.def("twospin_branch_marginals", &twospin_branch_marginals);

    // ---- gadgets ----
    py::class_<PottsRecursion>(m, "PottsRecursion")
        .def_static("make", &PottsRecursion::make, py::arg("q"), py::arg("beta"))
        .def_readonly("q", &PottsRecursion::q)
        .def_readonly("beta", &PottsRecursion::beta)
        .def_readonly("beta_hat", &PottsRecursion::beta_hat)
        .def_readonly("gamma_hat", &PottsRecursion::gamma_hat)
        .def_readonly("lambda_hat", &PottsRecursion::lambda_hat)
        .def_readonly("kappa", &PottsRecursion::kappa)
        .def("compose_value", &PottsRecursion::compose_value)
        .def("omega", &PottsRecursion::omega)
        .def("theta", &PottsRecursion::theta)
        .def("path_step_ratio", &PottsRecursion::path_step_ratio);
    py::class_<TwoSpinRecursion>(m, "TwoSpinRecursion")
        .def_static("make", &TwoSpinRecursion::make, py::arg("params"), py::arg("observable"))
        .def_readonly("params", &TwoSpinRecursion::params)
        .def_readonly("observable", &TwoSpinRecursion::obs)
        .def("compose_value", &TwoSpinRecursion::compose_value)
        .def("omega", &TwoSpinRecursion::omega)
        .def("theta", &TwoSpinRecursion::theta);

    py::class_<EdgeGadget>(m, "EdgeGadget")
        .def_readonly("graph", &EdgeGadget::graph)
        .def_readonly("port_a", &EdgeGadget::port_a)
        .def_readonly("port_b", &EdgeGadget::port_b)
        .def_readonly("recipe", &EdgeGadget::recipe)
        .def_readonly("B", &EdgeGadget::B)
        .def_readonly("S", &EdgeGadget::S)
        .def_readonly("A", &EdgeGadget::A)
        .def("size", &EdgeGadget::size)
        .def("__repr__", [](const EdgeGadget& g) {
            return "EdgeGadget(B=" + to_string(g.B) + ", S=" + to_string(g.S) + ")";
        });
    py::class_<FieldGadget>(m, "FieldGadget")
        .def_readonly("graph", &FieldGadget::graph)
        .def_readonly("root", &FieldGadget::root)
        .def_readonly("recipe", &FieldGadget::recipe)
        .def_readonly("R", &FieldGadget::R)
        .def_readonly("O", &FieldGadget::O)
        .def_readonly("A", &FieldGadget::A)
        .def("size", &FieldGadget::size)
        .def("__repr__", [](const FieldGadget& g) {
            return "FieldGadget(R=" + to_string(g.R) + ", O=" + to_string(g.O) + ")";
        });

    m.def("make_single_edge", &make_single_edge);
    m.def("make_path_gadget", &make_path_gadget);
    m.def("make_degenerate", &make_degenerate);
    m.def("make_field_edge", &make_field_edge);
    m.def("make_field_path", &make_field_path);
    m.def("compose_edge", [](const PottsRecursion& ctx, const std::vector<EdgeGadget>& children) {
        auto c = compose_edge(ctx, as_pointers(children));
        return py::make_tuple(c.gadget, c.predicted_B, c.predicted_S);
    });
    m.def("compose_field",
          [](const TwoSpinRecursion& ctx, const std::vector<FieldGadget>& children) {
              auto c = compose_field(ctx, as_pointers(children));
              return py::make_tuple(c.gadget, c.predicted_R, c.predicted_O);
          });
    py::class_<EdgeStatsResult>(m, "EdgeStats")
        .def_readonly("B", &EdgeStatsResult::B)
        .def_readonly("S", &EdgeStatsResult::S)
        .def_readonly("A", &EdgeStatsResult::A);
    m.def("edge_gadget_stats", &edge_gadget_stats, py::arg("graph"), py::arg("port_a"),
          py::arg("port_b"), py::arg("q"), py::arg("beta"), py::arg("options") = EnumOptions{});
    py::class_<FieldStatsResult>(m, "FieldStats")
        .def_readonly("R", &FieldStatsResult::R)
        .def_readonly("O", &FieldStatsResult::O)
        .def_readonly("A", &FieldStatsResult::A);
    m.def("field_gadget_stats", &field_gadget_stats, py::arg("graph"), py::arg("root"),
          py::arg("params"), py::arg("observable"), py::arg("options") = EnumOptions{});

    py::class_<PathBuild>(m, "PathBuild")
        .def_readonly("path", &PathBuild::path)
        .def_readonly("steps", &PathBuild::steps)
        .def_readonly("ell_bound", &PathBuild::ell_bound);
    m.def("build_path", &build_path);

    py::class_<LibraryBudget>(m, "LibraryBudget")
        .def(py::init<>())
        .def_readwrite("max_members", &LibraryBudget::max_members)
        .def_readwrite("max_rounds", &LibraryBudget::max_rounds)
        .def_readwrite("max_size", &LibraryBudget::max_size);
    py::class_<GadgetLibrary>(m, "GadgetLibrary")
        .def_readonly("edge_members", &GadgetLibrary::edge_members)
        .def_readonly("field_members", &GadgetLibrary::field_members)
        .def_readonly("lo", &GadgetLibrary::lo)
        .def_readonly("hi", &GadgetLibrary::hi)
        .def_readonly("tau", &GadgetLibrary::tau)
        .def_readonly("delta", &GadgetLibrary::delta)
        .def_readonly("mesh", &GadgetLibrary::mesh)
        .def_readonly("largest_gap", &GadgetLibrary::largest_gap)
        .def_readonly("x_lo", &GadgetLibrary::x_lo)
        .def_readonly("x_hi", &GadgetLibrary::x_hi)
        .def("members", &GadgetLibrary::members);
    m.def("build_dense_library_potts", &build_dense_library_potts, py::arg("ctx"), py::arg("tau"),
          py::arg("delta"), py::arg("budget") = LibraryBudget{});
    m.def("build_dense_library_twospin", &build_dense_library_twospin, py::arg("ctx"),
          py::arg("tau"), py::arg("delta"), py::arg("budget") = LibraryBudget{});
    m.def("twospin_merge_fixpoint_bracket", &twospin_merge_fixpoint_bracket);

    py::class_<BuildContext>(m, "BuildContext")
        .def_readonly("I_lo", &BuildContext::I_lo)
        .def_readonly("I_hi", &BuildContext::I_hi)
        .def_readonly("Ip_lo", &BuildContext::Ip_lo)
        .def_readonly("Ip_hi", &BuildContext::Ip_hi)
        .def_readonly("C_min", &BuildContext::C_min)
        .def_readonly("C_max", &BuildContext::C_max)
        .def_readonly("C", &BuildContext::C)
        .def_readonly("T_hat", &BuildContext::T_hat)
        .def_readonly("T", &BuildContext::T);
    m.def("make_build_context", &make_build_context);
    m.def("build_gadget", &build_gadget);

    py::class_<PairBudget>(m, "PairBudget")
        .def(py::init<>())
        .def_readwrite("max_members", &PairBudget::max_members)
        .def_readwrite("max_rounds", &PairBudget::max_rounds)
        .def_readwrite("max_size", &PairBudget::max_size);
    py::class_<EdgeGadgetPair>(m, "EdgeGadgetPair")
        .def_readonly("first", &EdgeGadgetPair::first)
        .def_readonly("second", &EdgeGadgetPair::second)
        .def_readonly("value_diff", &EdgeGadgetPair::value_diff)
        .def_readonly("gap_diff", &EdgeGadgetPair::gap_diff)
        .def_readonly("gap_bound", &EdgeGadgetPair::gap_bound);
    py::class_<FieldGadgetPair>(m, "FieldGadgetPair")
        .def_readonly("first", &FieldGadgetPair::first)
        .def_readonly("second", &FieldGadgetPair::second)
        .def_readonly("value_diff", &FieldGadgetPair::value_diff)
        .def_readonly("gap_diff", &FieldGadgetPair::gap_diff)
        .def_readonly("gap_bound", &FieldGadgetPair::gap_bound);
    m.def("search_gadget_pair_potts", &search_gadget_pair_potts, py::arg("ctx"), py::arg("r"),
          py::arg("gap_min"), py::arg("budget") = PairBudget{});
    m.def("search_gadget_pair_twospin", &search_gadget_pair_twospin, py::arg("ctx"), py::arg("r"),
          py::arg("gap_min"), py::arg("budget") = PairBudget{});

    py::class_<RecipeResult>(m, "RecipeResult")
        .def_readonly("edge", &RecipeResult::edge)
        .def_readonly("field", &RecipeResult::field);
    m.def(
        "evaluate_recipe",
        [](const std::string& text, std::optional<PottsRecursion> pc,
           std::optional<TwoSpinRecursion> tc) {
            return evaluate_recipe(text, pc ? &*pc : nullptr, tc ? &*tc : nullptr);
        },
        py::arg("text"), py::arg("potts_ctx") = std::nullopt, py::arg("twospin_ctx") = std::nullopt);

    // ---- phase gadgets ----
    py::class_<PhaseGadget>(m, "PhaseGadget")
        .def_readonly("graph", &PhaseGadget::graph)
        .def_readonly("n", &PhaseGadget::n)
        .def_readonly("t", &PhaseGadget::t)
        .def_readonly("delta", &PhaseGadget::delta)
        .def("ports", &PhaseGadget::ports)
        .def("interior", &PhaseGadget::interior)
        .def("audit", &PhaseGadget::audit);
    m.def("sample_phase_gadget", &sample_phase_gadget, py::arg("n"), py::arg("t"),
          py::arg("delta"), py::arg("seed"), py::arg("max_rejects") = 20000);
    m.def("phase_attribution", &phase_attribution);
    py::class_<PhaseAssessment>(m, "PhaseAssessment")
        .def_readonly("eps_balance", &PhaseAssessment::eps_balance)
        .def_readonly("eps_port", &PhaseAssessment::eps_port)
        .def_readonly("se_balance", &PhaseAssessment::se_balance)
        .def_readonly("se_port", &PhaseAssessment::se_port)
        .def_readonly("samples", &PhaseAssessment::samples);
    m.def("assess_phase_gadget_exact", &assess_phase_gadget_exact, py::arg("gadget"),
          py::arg("model"), py::arg("p_or_qplus"), py::arg("q_minus") = 0.0,
          py::arg("options") = EnumOptions{});
    m.def("assess_phase_gadget_mc", &assess_phase_gadget_mc, py::arg("gadget"), py::arg("model"),
          py::arg("p_or_qplus"), py::arg("q_minus"), py::arg("samples"), py::arg("burn_in"),
          py::arg("seed"));
    py::class_<PortLaw>(m, "PortLaw")
        .def_readonly("probs", &PortLaw::probs)
        .def_readonly("port_ids", &PortLaw::port_ids)
        .def("prob_of", &PortLaw::prob_of);
    m.def("ideal_port_distribution_potts", &ideal_port_distribution_potts);
    m.def("ideal_port_distribution_twospin", &ideal_port_distribution_twospin);

    // ---- reduction ----
    py::class_<CompositeInstance>(m, "CompositeInstance")
        .def_readonly("graph", &CompositeInstance::graph)
        .def_readonly("gadget_offset", &CompositeInstance::gadget_offset)
        .def_readonly("delta", &CompositeInstance::delta)
        .def("audit", &CompositeInstance::audit);
    m.def("build_composite_potts", &build_composite_potts);
    m.def("build_composite_twospin", &build_composite_twospin);
    py::class_<PottsEffectiveParams>(m, "PottsEffectiveParams")
        .def_readonly("p", &PottsEffectiveParams::p)
        .def_readonly("R0", &PottsEffectiveParams::R0)
        .def_readonly("R1", &PottsEffectiveParams::R1)
        .def_readonly("A0", &PottsEffectiveParams::A0)
        .def_readonly("A1", &PottsEffectiveParams::A1)
        .def_readonly("beta_hat", &PottsEffectiveParams::beta_hat)
        .def_readonly("ell", &PottsEffectiveParams::ell);
    m.def("potts_effective_params", &potts_effective_params);
    py::class_<TwoSpinEffectiveParams>(m, "TwoSpinEffectiveParams")
        .def_readonly("q_plus", &TwoSpinEffectiveParams::q_plus)
        .def_readonly("q_minus", &TwoSpinEffectiveParams::q_minus)
        .def_readonly("M_pp", &TwoSpinEffectiveParams::M_pp)
        .def_readonly("M_mm", &TwoSpinEffectiveParams::M_mm)
        .def_readonly("M_pm", &TwoSpinEffectiveParams::M_pm)
        .def_readonly("M_mp", &TwoSpinEffectiveParams::M_mp)
        .def_readonly("alpha", &TwoSpinEffectiveParams::alpha)
        .def_readonly("lambda_hat", &TwoSpinEffectiveParams::lambda_hat);
    m.def("twospin_effective_params", &twospin_effective_params);
    py::class_<PottsReductionPlan>(m, "PottsReductionPlan")
        .def_readonly("ell", &PottsReductionPlan::ell)
        .def_readonly("p", &PottsReductionPlan::p)
        .def_readonly("p_exact", &PottsReductionPlan::p_exact)
        .def_readonly("t_desk", &PottsReductionPlan::t_desk)
        .def_readonly("t_paper", &PottsReductionPlan::t_paper)
        .def_readonly("epsilon_paper", &PottsReductionPlan::epsilon_paper)
        .def_readonly("B_path", &PottsReductionPlan::B_path)
        .def_readonly("B_probe_1", &PottsReductionPlan::B_probe_1)
        .def_readonly("B_probe_2", &PottsReductionPlan::B_probe_2)
        .def("serialize", &PottsReductionPlan::serialize);
    m.def("plan_reduction_potts", &plan_reduction_potts);
    py::class_<TwoSpinReductionPlan>(m, "TwoSpinReductionPlan")
        .def_readonly("ell", &TwoSpinReductionPlan::ell)
        .def_readonly("swap_roles", &TwoSpinReductionPlan::swap_roles)
        .def_readonly("alpha", &TwoSpinReductionPlan::alpha)
        .def_readonly("Lambda_hat", &TwoSpinReductionPlan::Lambda_hat)
        .def_readonly("t_desk", &TwoSpinReductionPlan::t_desk)
        .def("serialize", &TwoSpinReductionPlan::serialize);
    m.def("plan_reduction_twospin", &plan_reduction_twospin);
    py::class_<PottsReadings>(m, "PottsReadings")
        .def(py::init([](Rat s1, Rat s2, Rat a1, Rat a2, Rat g1, Rat g2) {
                 return PottsReadings{s1, s2, a1, a2, g1, g2};
             }),
             py::arg("S_hat_1"), py::arg("S_hat_2"), py::arg("A_probe_1"), py::arg("A_probe_2"),
             py::arg("S_probe_1"), py::arg("S_probe_2"));
    m.def("subtraction_estimate_potts", &subtraction_estimate_potts, py::arg("readings"),
          py::arg("A0"), py::arg("A1"), py::arg("edges_of_H"), py::arg("min_gap") = Rat(0));
    py::class_<TwoSpinReadings>(m, "TwoSpinReadings")
        .def(py::init([](Rat m1, Rat m2, Rat a1, Rat a2, Rat o1, Rat o2) {
                 return TwoSpinReadings{m1, m2, a1, a2, o1, o2};
             }),
             py::arg("M_hat_1"), py::arg("M_hat_2"), py::arg("A_1"), py::arg("A_2"),
             py::arg("O_1"), py::arg("O_2"));
    m.def("subtraction_estimate_twospin", &subtraction_estimate_twospin, py::arg("readings"),
          py::arg("q_plus"), py::arg("q_minus"), py::arg("vertices_of_H"),
          py::arg("min_gap") = Rat(0));
    m.def("idealized_phase_marginal_check_potts", &idealized_phase_marginal_check_potts,
          py::arg("H"), py::arg("q"), py::arg("p"), py::arg("B_probe"), py::arg("B_path"),
          py::arg("ell"), py::arg("options") = EnumOptions{},
          py::arg("target_beta_hat") = std::optional<Rat>{});
    m.def("idealized_phase_marginal_check_twospin", &idealized_phase_marginal_check_twospin,
          py::arg("H"), py::arg("base"), py::arg("q_plus"), py::arg("q_minus"), py::arg("R"),
          py::arg("R_plus"), py::arg("R_minus"), py::arg("ell_plus"), py::arg("ell_minus"),
          py::arg("options") = EnumOptions{});
    py::class_<PerturbationResult>(m, "PerturbationResult")
        .def_readonly("bound", &PerturbationResult::bound)
        .def_readonly("measured", &PerturbationResult::measured);
    m.def("perturbation_bound_potts", &perturbation_bound_potts, py::arg("H"), py::arg("F_edges"),
          py::arg("q"), py::arg("beta"), py::arg("beta0"), py::arg("beta1"),
          py::arg("options") = EnumOptions{});
    m.def("perturbation_bound_twospin", &perturbation_bound_twospin, py::arg("G"), py::arg("S"),
          py::arg("base"), py::arg("observable"), py::arg("lambda1"), py::arg("lambda2"),
          py::arg("subgraph") = std::optional<SubgraphRef>{}, py::arg("options") = EnumOptions{});

    // ---- interpolation ----
    py::enum_<OracleKind>(m, "OracleKind")
        .value("Exact", OracleKind::Exact)
        .value("Mc", OracleKind::Mc)
        .value("SyntheticNoise", OracleKind::SyntheticNoise);
    py::class_<OracleHandle>(m, "OracleHandle")
        .def(py::init<>())
        .def_readwrite("kind", &OracleHandle::kind)
        .def_readwrite("rel_err", &OracleHandle::rel_err)
        .def_readwrite("seed", &OracleHandle::seed)
        .def_readwrite("mc_samples", &OracleHandle::mc_samples)
        .def_readwrite("mc_burn_in", &OracleHandle::mc_burn_in);
    py::enum_<GridMode>(m, "GridMode")
        .value("Paper", GridMode::Paper)
        .value("Tight", GridMode::Tight);
    m.def("grid_for_error", &grid_for_error);
    py::class_<Bracket>(m, "Bracket")
        .def_readonly("lower", &Bracket::lower)
        .def_readonly("upper", &Bracket::upper)
        .def("midpoint", &Bracket::midpoint)
        .def("width", &Bracket::width);
    py::class_<IntegrationResult>(m, "IntegrationResult")
        .def_readonly("bracket", &IntegrationResult::bracket)
        .def_readonly("base_term", &IntegrationResult::base_term)
        .def_readonly("lower_sum", &IntegrationResult::lower_sum)
        .def_readonly("upper_sum", &IntegrationResult::upper_sum)
        .def_readonly("monotone_ok", &IntegrationResult::monotone_ok)
        .def_readonly("oracle_calls", &IntegrationResult::oracle_calls)
        .def_readonly("grid", &IntegrationResult::grid)
        .def_readonly("readings", &IntegrationResult::readings);
    m.def("integrate_log_partition", &integrate_log_partition, py::arg("model"), py::arg("graph"),
          py::arg("oracle"), py::arg("target"), py::arg("M"), py::arg("options") = EnumOptions{});
    m.def("log_rat", &log_rat);

    // ---- samplers ----
    py::class_<ChainState>(m, "ChainState")
        .def_readonly("config", &ChainState::config)
        .def_readonly("steps", &ChainState::steps);
    m.def("glauber_run", &glauber_run, py::arg("graph"), py::arg("model"), py::arg("steps"),
          py::arg("seed"), py::arg("init") = std::optional<SpinConfig>{});
    m.def("heat_bath_weights", &heat_bath_weights);
    m.def("glauber_kernel", &glauber_kernel);
    py::class_<Estimate>(m, "Estimate")
        .def_readonly("mean", &Estimate::mean)
        .def_readonly("std_error", &Estimate::std_error)
        .def_readonly("std_error_defined", &Estimate::std_error_defined)
        .def_readonly("samples", &Estimate::samples)
        .def_readonly("burn_in", &Estimate::burn_in)
        .def_readonly("seed", &Estimate::seed);
    m.def("mc_estimate", &mc_estimate, py::arg("graph"), py::arg("model"), py::arg("observable"),
          py::arg("samples"), py::arg("burn_in"), py::arg("thinning"), py::arg("seed"),
          py::arg("init") = std::optional<SpinConfig>{});
    m.def("observable_value", &observable_value);
}
