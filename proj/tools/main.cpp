// spinobs: exact gadget algebra, reductions and samplers for Gibbs observables.
//
// Exit codes: 0 ok, 2 validation error, 3 budget exceeded, 4 numerical failure.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "spinobs/criticality.hpp"
#include "spinobs/errors.hpp"
#include "spinobs/exact.hpp"
#include "spinobs/gadgets.hpp"
#include "spinobs/interpolate.hpp"
#include "spinobs/phase.hpp"
#include "spinobs/reduction.hpp"
#include "spinobs/report.hpp"
#include "spinobs/sampler.hpp"

using namespace spinobs;

namespace {

struct GlobalOpts {
    int threads = 1;
    uint64_t budget = uint64_t(1) << 25;
    uint64_t seed = 1;
    EnumOptions enum_opts() const { return EnumOptions{budget, threads}; }
};

struct ModelArgs {
    std::string model;  // potts | twospin | hardcore | ising
    int q = 3;
    std::string beta, gamma, lambda = "1";
    std::string observable = "susceptibility";

    void attach(CLI::App* cmd, bool with_observable = true) {
        cmd->add_option("--model", model, "potts | twospin | hardcore | ising")->required();
        cmd->add_option("--q", q, "number of Potts spins");
        cmd->add_option("--beta", beta, "edge activity (rational)");
        cmd->add_option("--gamma", gamma, "two-spin (1,1) edge activity");
        cmd->add_option("--lambda", lambda, "two-spin vertex activity");
        if (with_observable)
            cmd->add_option("--observable", observable,
                            "susceptibility | magnetization | a,b,c triple");
    }

    ModelParams build() const {
        if (model == "potts") {
            if (beta.empty()) throw ValidationError("--beta required for potts");
            return PottsParams{q, parse_rational(beta)};
        }
        if (model == "twospin") {
            if (beta.empty() || gamma.empty())
                throw ValidationError("--beta and --gamma required for twospin");
            return TwoSpinParams{parse_rational(beta), parse_rational(gamma),
                                 parse_rational(lambda)};
        }
        if (model == "hardcore") return hardcore(parse_rational(lambda));
        if (model == "ising") {
            if (beta.empty()) throw ValidationError("--beta required for ising");
            return ising(parse_rational(beta), parse_rational(lambda));
        }
        throw ValidationError("unknown model '" + model + "'");
    }

    VertexEdgeObservable build_observable() const {
        if (observable == "susceptibility") return susceptibility_obs();
        if (observable == "magnetization") return magnetization();
        auto c1 = observable.find(',');
        auto c2 = observable.rfind(',');
        if (c1 == std::string::npos || c2 == c1)
            throw ValidationError("observable must be susceptibility|magnetization|a,b,c");
        return VertexEdgeObservable{parse_rational(observable.substr(0, c1)),
                                    parse_rational(observable.substr(c1 + 1, c2 - c1 - 1)),
                                    parse_rational(observable.substr(c2 + 1))};
    }
};

void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-")
        std::cout << content;
    else
        atomic_write_file(path, content);
}

PinSet parse_pins(const std::vector<std::string>& pins, const std::vector<std::string>& equals,
                  const std::vector<std::string>& distincts) {
    PinSet ps;
    auto split_pair = [](const std::string& s, char sep) {
        auto pos = s.find(sep);
        if (pos == std::string::npos)
            throw ValidationError("expected pair separated by '" + std::string(1, sep) + "': " + s);
        return std::pair<int, int>(std::stoi(s.substr(0, pos)), std::stoi(s.substr(pos + 1)));
    };
    for (const auto& s : pins) {
        auto [v, spin] = split_pair(s, '=');
        ps.pin(v, spin);
    }
    for (const auto& s : equals) {
        auto [u, v] = split_pair(s, ',');
        ps.equal_spins(u, v);
    }
    for (const auto& s : distincts) {
        auto [u, v] = split_pair(s, ',');
        ps.distinct_spins(u, v);
    }
    return ps;
}

int run_cli(const std::vector<std::string>& args);

// `run` re-drives the parser from a config file: command=<subcommand> (space
// separated for nested subcommands), every other key becomes --key value. The
// normalized config doubles as the replay file.
int cmd_run(const std::string& config_path, const std::string& replay_out) {
    KeyValueConfig cfg = KeyValueConfig::parse_file(config_path);
    std::string command = cfg.get("command");
    std::vector<std::string> argv;
    {
        std::istringstream cs(command);
        std::string tok;
        while (cs >> tok) argv.push_back(tok);
    }
    std::istringstream in(cfg.serialize());
    std::string entry;
    while (std::getline(in, entry)) {
        auto eq = entry.find('=');
        if (eq == std::string::npos) continue;
        std::string key = entry.substr(0, eq), value = entry.substr(eq + 1);
        if (key == "command") continue;
        (void)cfg.get(key);  // mark consumed; unknown option names fail in the parser
        if (key == "positional") {
            argv.push_back(value);
        } else {
            argv.push_back("--" + key);
            if (!value.empty()) argv.push_back(value);
        }
    }
    cfg.reject_unknown_keys();
    if (!replay_out.empty()) atomic_write_file(replay_out, cfg.serialize());
    return run_cli(argv);
}

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"gadget algebra and counting-to-observables reductions for Gibbs distributions"};
    app.require_subcommand(1);
    GlobalOpts g;
    app.add_option("--threads", g.threads, "worker threads for enumeration");
    app.add_option("--budget", g.budget, "enumeration budget (max configurations)");
    app.add_option("--seed", g.seed, "global seed");

    // ---- exact ----
    auto* exact = app.add_subcommand("exact", "exact quantities by enumeration");
    ModelArgs exact_model;
    exact_model.attach(exact);
    std::string exact_graph, exact_quantity = "observable";
    std::vector<std::string> exact_pins, exact_eq, exact_ne;
    exact->add_option("--graph", exact_graph, "graph file")->required();
    exact->add_option("--quantity", exact_quantity, "observable | z | prob");
    exact->add_option("--pin", exact_pins, "vertex=spin");
    exact->add_option("--pin-equal", exact_eq, "u,v equal-spin pin");
    exact->add_option("--pin-distinct", exact_ne, "u,v distinct-spin pin");
    exact->callback([&]() {
        auto model = exact_model.build();
        auto graph = Multigraph::from_edge_list_file(exact_graph);
        auto pins = parse_pins(exact_pins, exact_eq, exact_ne);
        Rat v;
        if (exact_quantity == "z")
            v = partition_function(graph, model, g.enum_opts());
        else if (exact_quantity == "prob")
            v = gibbs_probability(graph, model, pins, g.enum_opts());
        else if (exact_quantity == "observable")
            v = observable_expectation(graph, model, exact_model.build_observable(), pins,
                                       std::nullopt, g.enum_opts());
        else
            throw ValidationError("unknown quantity '" + exact_quantity + "'");
        std::cout << to_string(v) << "\n";
    });

    // ---- critical ----
    auto* critical = app.add_subcommand("critical", "critical thresholds and fixpoints");
    auto* cp = critical->add_subcommand("potts", "beta_c and port bias");
    int cp_q = 3, cp_delta = 3;
    std::string cp_beta;
    cp->add_option("--q", cp_q)->required();
    cp->add_option("--delta", cp_delta)->required();
    cp->add_option("--beta", cp_beta, "report port bias for this activity");
    cp->callback([&]() {
        std::cout << "beta_c=" << format_real(potts_beta_c(cp_q, cp_delta)) << "\n";
        if (!cp_beta.empty()) {
            auto b = potts_port_bias(cp_q, cp_delta, parse_rational(cp_beta));
            std::cout << "x=" << format_real(b.x) << "\np=" << format_real(b.p)
                      << "\nresidual=" << format_real(b.residual) << "\n";
            if (b.exact_p)
                std::cout << "x_exact=" << to_string(*b.exact_x)
                          << "\np_exact=" << to_string(*b.exact_p) << "\n";
        }
    });
    auto* ct = critical->add_subcommand("twospin", "uniqueness report and branch marginals");
    std::string ct_beta, ct_gamma, ct_lambda;
    int ct_delta = 3;
    bool ct_branch = false;
    ct->add_option("--beta", ct_beta)->required();
    ct->add_option("--gamma", ct_gamma)->required();
    ct->add_option("--lambda", ct_lambda)->required();
    ct->add_option("--delta", ct_delta)->required();
    ct->add_flag("--branch", ct_branch, "also solve the two-cycle branch marginals");
    ct->callback([&]() {
        TwoSpinParams p{parse_rational(ct_beta), parse_rational(ct_gamma),
                        parse_rational(ct_lambda)};
        auto rep = twospin_uniqueness(p, ct_delta);
        std::cout << "x_star=" << format_real(rep.x_star) << "\n"
                  << "derivative_magnitude=" << format_real(rep.derivative_magnitude) << "\n"
                  << "in_nonuniqueness=" << (rep.in_nonuniqueness ? 1 : 0) << "\n"
                  << "verdict="
                  << (rep.verdict == UniquenessVerdict::Boundary
                          ? "boundary"
                          : (rep.in_nonuniqueness ? "non-uniqueness" : "uniqueness"))
                  << "\nresidual=" << format_real(rep.residual) << "\n";
        if (ct_branch) {
            auto bm = twospin_branch_marginals(p, ct_delta);
            std::cout << "q_plus=" << format_real(bm.q_plus)
                      << "\nq_minus=" << format_real(bm.q_minus)
                      << "\nbranch_residual=" << format_real(bm.residual)
                      << "\ndegenerate=" << (bm.degenerate ? 1 : 0) << "\n";
        }
    });

    // ---- gadget ----
    auto* gadget = app.add_subcommand("gadget", "edge-interaction and field gadgets");
    auto* gstats = gadget->add_subcommand("stats", "exact gadget statistics");
    ModelArgs gs_model;
    gs_model.attach(gstats);
    std::string gs_recipe, gs_expr, gs_graph_file, gs_ports = "0,1", gs_format = "text", gs_out;
    gstats->add_option("--recipe", gs_recipe, "recipe file (one expression per line)");
    gstats->add_option("--expr", gs_expr, "inline recipe expression")->excludes("--recipe");
    gstats->add_option("--graph", gs_graph_file, "raw gadget graph file");
    gstats->add_option("--ports", gs_ports, "ports 'a,b' (edge) or root 'r' (field)");
    gstats->add_option("--format", gs_format, "text | csv");
    gstats->add_option("-o,--out", gs_out, "output path (default stdout)");
    gstats->callback([&]() {
        auto model = gs_model.build();
        std::optional<PottsRecursion> pc;
        std::optional<TwoSpinRecursion> tc;
        if (is_potts(model))
            pc = PottsRecursion::make(as_potts(model).q, as_potts(model).beta);
        else
            tc = TwoSpinRecursion::make(as_twospin(model), gs_model.build_observable());
        CsvWriter csv({"kind", "value", "gap", "conditional_mean", "vertices", "edges"});
        std::ostringstream text;
        auto emit_edge = [&](const Rat& B, const Rat& S, const Rat& A, int nv, int ne) {
            text << "B=" << to_string(B) << "\nS=" << to_string(S) << "\nA=" << to_string(A)
                 << "\n";
            csv.add_row({"edge", to_string(B), to_string(S), to_string(A), std::to_string(nv),
                         std::to_string(ne)});
        };
        auto emit_field = [&](const Rat& R, const Rat& O, const Rat& A, int nv, int ne) {
            text << "R=" << to_string(R) << "\nO=" << to_string(O) << "\nA=" << to_string(A)
                 << "\n";
            csv.add_row({"field", to_string(R), to_string(O), to_string(A), std::to_string(nv),
                         std::to_string(ne)});
        };
        if (!gs_graph_file.empty()) {
            auto graph = Multigraph::from_edge_list_file(gs_graph_file);
            if (pc) {
                auto comma = gs_ports.find(',');
                if (comma == std::string::npos)
                    throw ValidationError("--ports a,b required for edge gadgets");
                int a = std::stoi(gs_ports.substr(0, comma));
                int b = std::stoi(gs_ports.substr(comma + 1));
                auto st = edge_gadget_stats(graph, a, b, pc->q, pc->beta, g.enum_opts());
                emit_edge(st.B, st.S, st.A, graph.vertex_count(), graph.edge_count());
            } else {
                int root = std::stoi(gs_ports);
                auto st = field_gadget_stats(graph, root, tc->params, tc->obs, g.enum_opts());
                emit_field(st.R, st.O, st.A, graph.vertex_count(), graph.edge_count());
            }
        } else {
            std::string recipe_text = gs_expr;
            if (!gs_recipe.empty()) {
                std::ifstream in(gs_recipe);
                if (!in) throw ValidationError("cannot open recipe file: " + gs_recipe);
                std::stringstream buf;
                buf << in.rdbuf();
                recipe_text = buf.str();
            }
            if (recipe_text.empty())
                throw ValidationError("one of --recipe, --expr, --graph is required");
            auto res = evaluate_recipe(recipe_text, pc ? &*pc : nullptr, tc ? &*tc : nullptr);
            if (res.edge)
                emit_edge(res.edge->B, res.edge->S, res.edge->A, res.edge->graph.vertex_count(),
                          res.edge->graph.edge_count());
            else if (res.field)
                emit_field(res.field->R, res.field->O, res.field->A,
                           res.field->graph.vertex_count(), res.field->graph.edge_count());
        }
        emit(gs_out, gs_format == "csv" ? csv.str() : text.str());
    });

    auto* gpath = gadget->add_subcommand("build-path", "shortest odd path with B - 1 < r");
    int gp_q = 3;
    std::string gp_beta, gp_r, gp_format = "text", gp_out;
    gpath->add_option("--q", gp_q)->required();
    gpath->add_option("--beta", gp_beta)->required();
    gpath->add_option("--r", gp_r)->required();
    gpath->add_option("--format", gp_format, "text | csv");
    gpath->add_option("-o,--out", gp_out);
    gpath->callback([&]() {
        auto ctx = PottsRecursion::make(gp_q, parse_rational(gp_beta));
        auto pb = build_path(ctx, parse_rational(gp_r));
        if (gp_format == "csv") {
            CsvWriter csv({"edges", "B", "B_minus_1", "S", "kappa", "edges_bound_paper"});
            csv.add_row({std::to_string(pb.path.graph.edge_count()), to_string(pb.path.B),
                         to_string(Rat(pb.path.B - 1)), to_string(pb.path.S),
                         to_string(ctx.kappa), std::to_string(2 * pb.ell_bound + 1)});
            emit(gp_out, csv.str());
            return;
        }
        std::ostringstream text;
        text << "edges=" << pb.path.graph.edge_count() << "\nB=" << to_string(pb.path.B)
             << "\nB_minus_1=" << to_string(Rat(pb.path.B - 1))
             << "\nS=" << to_string(pb.path.S) << "\nkappa=" << to_string(ctx.kappa)
             << "\nell_bound_paper=" << pb.ell_bound << "\nedges_bound_paper="
             << 2 * pb.ell_bound + 1 << "\n";
        emit(gp_out, text.str());
    });

    auto* glib = gadget->add_subcommand("library", "dense gadget library around the fixpoint");
    ModelArgs gl_model;
    gl_model.attach(glib);
    std::string gl_tau = "1/25", gl_delta = "1/2", gl_format = "text", gl_out;
    glib->add_option("--tau", gl_tau, "interval half-width");
    glib->add_option("--delta-mesh", gl_delta, "mesh factor delta in (0,1)");
    glib->add_option("--format", gl_format, "text | csv");
    glib->add_option("-o,--out", gl_out);
    glib->callback([&]() {
        auto model = gl_model.build();
        GadgetLibrary lib;
        if (is_potts(model)) {
            auto ctx = PottsRecursion::make(as_potts(model).q, as_potts(model).beta);
            lib = build_dense_library_potts(ctx, parse_rational(gl_tau), parse_rational(gl_delta));
        } else {
            auto ctx = TwoSpinRecursion::make(as_twospin(model), gl_model.build_observable());
            lib = build_dense_library_twospin(ctx, parse_rational(gl_tau),
                                              parse_rational(gl_delta));
        }
        CsvWriter csv({"index", "value", "gap", "vertices", "recipe"});
        std::ostringstream text;
        text << "members=" << lib.members() << "\ninterval_lo=" << to_string(lib.lo)
             << "\ninterval_hi=" << to_string(lib.hi) << "\nmesh=" << to_string(lib.mesh) << "\n";
        int idx = 0;
        if (lib.kind == GadgetKind::PottsEdge)
            for (const auto& m : lib.edge_members)
                csv.add_row({std::to_string(idx++), to_string(m.B), to_string(m.S),
                             std::to_string(m.size()), m.recipe});
        else
            for (const auto& m : lib.field_members)
                csv.add_row({std::to_string(idx++), to_string(m.R), to_string(m.O),
                             std::to_string(m.size()), m.recipe});
        emit(gl_out, gl_format == "csv" ? csv.str() : text.str());
    });

    auto* gpair = gadget->add_subcommand("pair", "matched-interaction / separated-gap pair");
    ModelArgs gpr_model;
    gpr_model.attach(gpair);
    std::string gpr_r = "1/100", gpr_gap = "0", gpr_format = "text", gpr_out;
    gpair->add_option("--r", gpr_r, "interaction match tolerance");
    gpair->add_option("--gap-min", gpr_gap, "required gap separation");
    gpair->add_option("--format", gpr_format, "text | csv");
    gpair->add_option("-o,--out", gpr_out);
    gpair->callback([&]() {
        auto model = gpr_model.build();
        CsvWriter csv({"which", "value", "gap", "vertices", "recipe"});
        std::ostringstream text;
        if (is_potts(model)) {
            auto ctx = PottsRecursion::make(as_potts(model).q, as_potts(model).beta);
            auto pr = search_gadget_pair_potts(ctx, parse_rational(gpr_r), parse_rational(gpr_gap));
            text << "B1=" << to_string(pr.first.B) << "\nB2=" << to_string(pr.second.B)
                 << "\nS1=" << to_string(pr.first.S) << "\nS2=" << to_string(pr.second.S)
                 << "\nvalue_diff=" << to_string(pr.value_diff)
                 << "\ngap_diff=" << to_string(pr.gap_diff)
                 << "\ngap_bound_2T=" << to_string(pr.gap_bound) << "\n";
            csv.add_row({"1", to_string(pr.first.B), to_string(pr.first.S),
                         std::to_string(pr.first.size()), pr.first.recipe});
            csv.add_row({"2", to_string(pr.second.B), to_string(pr.second.S),
                         std::to_string(pr.second.size()), pr.second.recipe});
        } else {
            auto ctx = TwoSpinRecursion::make(as_twospin(model), gpr_model.build_observable());
            auto pr =
                search_gadget_pair_twospin(ctx, parse_rational(gpr_r), parse_rational(gpr_gap));
            text << "R1=" << to_string(pr.first.R) << "\nR2=" << to_string(pr.second.R)
                 << "\nO1=" << to_string(pr.first.O) << "\nO2=" << to_string(pr.second.O)
                 << "\nvalue_diff=" << to_string(pr.value_diff)
                 << "\ngap_diff=" << to_string(pr.gap_diff)
                 << "\ngap_bound_2T=" << to_string(pr.gap_bound) << "\n";
            csv.add_row({"1", to_string(pr.first.R), to_string(pr.first.O),
                         std::to_string(pr.first.size()), pr.first.recipe});
            csv.add_row({"2", to_string(pr.second.R), to_string(pr.second.O),
                         std::to_string(pr.second.size()), pr.second.recipe});
        }
        emit(gpr_out, gpr_format == "csv" ? csv.str() : text.str());
    });

    // ---- phase ----
    auto* phase = app.add_subcommand("phase", "bipartite phase gadgets");
    auto* psample = phase->add_subcommand("sample", "configuration-model sample");
    int ps_n = 4, ps_t = 2, ps_delta = 3;
    uint64_t ps_seed = 1;
    std::string ps_out;
    psample->add_option("--n", ps_n)->required();
    psample->add_option("--t", ps_t)->required();
    psample->add_option("--delta", ps_delta)->required();
    psample->add_option("--seed", ps_seed);
    psample->add_option("-o,--out", ps_out, "edge-list output path");
    psample->callback([&]() {
        auto pg = sample_phase_gadget(ps_n, ps_t, ps_delta, ps_seed);
        emit(ps_out, pg.graph.to_edge_list());
    });

    auto* passess = phase->add_subcommand("assess", "balance and port-law assessment");
    ModelArgs pa_model;
    pa_model.attach(passess, false);
    std::string pa_graph, pa_mode = "exact";
    int pa_n = 0, pa_t = 0, pa_delta = 3;
    long long pa_samples = 100000, pa_burn = 10000;
    uint64_t pa_seed = 1;
    double pa_bias = 0, pa_qplus = 0, pa_qminus = 0;
    passess->add_option("--graph", pa_graph, "gadget edge-list (from 'phase sample')")->required();
    passess->add_option("--n", pa_n)->required();
    passess->add_option("--t", pa_t)->required();
    passess->add_option("--delta", pa_delta)->required();
    passess->add_option("--mode", pa_mode, "exact | mc");
    passess->add_option("--samples", pa_samples);
    passess->add_option("--burn-in", pa_burn);
    passess->add_option("--seed", pa_seed);
    passess->add_option("--bias", pa_bias, "Potts port bias p");
    passess->add_option("--qplus", pa_qplus, "two-spin branch marginal q+");
    passess->add_option("--qminus", pa_qminus, "two-spin branch marginal q-");
    passess->callback([&]() {
        auto model = pa_model.build();
        PhaseGadget pg;
        pg.n = pa_n;
        pg.t = pa_t;
        pg.delta = pa_delta;
        pg.graph = Multigraph::from_edge_list_file(pa_graph);
        pg.audit();
        double b1 = is_potts(model) ? pa_bias : pa_qplus;
        PhaseAssessment a =
            (pa_mode == "mc")
                ? assess_phase_gadget_mc(pg, model, b1, pa_qminus, pa_samples, pa_burn, pa_seed)
                : assess_phase_gadget_exact(pg, model, b1, pa_qminus, g.enum_opts());
        std::cout << "eps_balance=" << format_real(a.eps_balance)
                  << "\neps_port=" << format_real(a.eps_port)
                  << "\nse_balance=" << format_real(a.se_balance)
                  << "\nse_port=" << format_real(a.se_port) << "\nsamples=" << a.samples << "\n";
    });

    // ---- reduce ----
    auto* reduce = app.add_subcommand("reduce", "reduction planning and effective parameters");
    auto* rp = reduce->add_subcommand("potts", "susceptibility reduction plan");
    std::string rp_graph, rp_target, rp_beta, rp_plan_out, rp_csv;
    int rp_q = 3, rp_delta = 3;
    double rp_eta = 0.1;
    rp->add_option("--graph", rp_graph)->required();
    rp->add_option("--target", rp_target, "target beta_hat")->required();
    rp->add_option("--base-q", rp_q)->required();
    rp->add_option("--base-beta", rp_beta)->required();
    rp->add_option("--base-delta", rp_delta)->required();
    rp->add_option("--eta", rp_eta);
    rp->add_option("--plan-out", rp_plan_out);
    rp->add_option("--csv", rp_csv);
    rp->callback([&]() {
        auto H = Multigraph::from_edge_list_file(rp_graph);
        auto plan = plan_reduction_potts(rp_q, rp_delta, parse_rational(rp_beta), H,
                                         parse_rational(rp_target), rp_eta);
        if (!rp_plan_out.empty()) emit(rp_plan_out, plan.serialize());
        if (!rp_csv.empty()) {
            auto eff = potts_effective_params(rp_q, plan.p, plan.B_probe_1, plan.B_path, plan.ell);
            CsvWriter csv({"key", "value"});
            csv.add_row({"ell", std::to_string(plan.ell)});
            csv.add_row({"p", to_string(plan.p)});
            csv.add_row({"R0", to_string(eff.R0)});
            csv.add_row({"R1", to_string(eff.R1)});
            csv.add_row({"A0", to_string(eff.A0)});
            csv.add_row({"A1", to_string(eff.A1)});
            csv.add_row({"beta_hat", to_string(eff.beta_hat)});
            emit(rp_csv, csv.str());
        }
        std::cout << "ell=" << plan.ell << "\n";
    });
    auto* rt = reduce->add_subcommand("twospin", "vertex-edge observable reduction plan");
    std::string rt_graph, rt_target, rt_beta, rt_gamma, rt_lambda, rt_obs = "1,0,0";
    std::string rt_plan_out, rt_csv;
    int rt_delta = 3;
    double rt_eta = 0.1;
    rt->add_option("--graph", rt_graph)->required();
    rt->add_option("--target", rt_target, "target lambda_hat")->required();
    rt->add_option("--base-beta", rt_beta)->required();
    rt->add_option("--base-gamma", rt_gamma)->required();
    rt->add_option("--base-lambda", rt_lambda)->required();
    rt->add_option("--base-delta", rt_delta)->required();
    rt->add_option("--obs", rt_obs, "a,b,c observable triple");
    rt->add_option("--eta", rt_eta);
    rt->add_option("--plan-out", rt_plan_out);
    rt->add_option("--csv", rt_csv);
    rt->callback([&]() {
        auto H = Multigraph::from_edge_list_file(rt_graph);
        TwoSpinParams base{parse_rational(rt_beta), parse_rational(rt_gamma),
                           parse_rational(rt_lambda)};
        ModelArgs oa;
        oa.observable = rt_obs;
        auto plan = plan_reduction_twospin(base, oa.build_observable(), rt_delta, H,
                                           parse_rational(rt_target), rt_eta);
        if (!rt_plan_out.empty()) emit(rt_plan_out, plan.serialize());
        if (!rt_csv.empty()) {
            auto eff = twospin_effective_params(base, plan.q_plus, plan.q_minus, plan.R,
                                                plan.R_plus, plan.R_minus, plan.ell, plan.ell);
            CsvWriter csv({"key", "value"});
            csv.add_row({"ell", std::to_string(plan.ell)});
            csv.add_row({"alpha", to_string(eff.alpha)});
            csv.add_row({"lambda_hat", to_string(eff.lambda_hat)});
            csv.add_row({"q_plus", to_string(plan.q_plus)});
            csv.add_row({"q_minus", to_string(plan.q_minus)});
            emit(rt_csv, csv.str());
        }
        std::cout << "ell=" << plan.ell << "\n";
    });

    // ---- interpolate ----
    auto* interp = app.add_subcommand("interpolate", "log-partition reconstruction with brackets");
    ModelArgs in_model;
    in_model.attach(interp, false);
    std::string in_graph, in_target, in_oracle = "exact", in_csv, in_grid, in_eps;
    interp->add_option("--graph", in_graph)->required();
    interp->add_option("--target", in_target)->required();
    interp->add_option("--grid", in_grid, "grid size M");
    interp->add_option("--eps", in_eps, "target width (tight-mode grid)");
    interp->add_option("--oracle", in_oracle, "exact | mc:samples | noise:eps");
    interp->add_option("--csv", in_csv);
    interp->callback([&]() {
        auto model = in_model.build();
        auto graph = Multigraph::from_edge_list_file(in_graph);
        Rat target = parse_rational(in_target);
        long long M;
        if (!in_grid.empty()) {
            M = std::stoll(in_grid);
        } else if (!in_eps.empty()) {
            Int m = grid_for_error(model, graph, target, std::stod(in_eps), GridMode::Tight);
            if (!m.fits_slong_p()) throw BudgetError("tight-mode grid too large to run");
            M = m.get_si();
        } else {
            throw ValidationError("one of --grid or --eps is required");
        }
        OracleHandle oracle;
        oracle.seed = g.seed;
        if (in_oracle == "exact") {
            oracle.kind = OracleKind::Exact;
        } else if (in_oracle.rfind("mc:", 0) == 0) {
            oracle.kind = OracleKind::Mc;
            oracle.mc_samples = std::stoll(in_oracle.substr(3));
        } else if (in_oracle.rfind("noise:", 0) == 0) {
            oracle.kind = OracleKind::SyntheticNoise;
            oracle.rel_err = std::stod(in_oracle.substr(6));
        } else {
            throw ValidationError("unknown oracle '" + in_oracle + "'");
        }
        auto res = integrate_log_partition(model, graph, oracle, target, M, g.enum_opts());
        if (!in_csv.empty()) {
            CsvWriter csv({"i", "x", "reading"});
            for (size_t i = 0; i < res.grid.size(); ++i)
                csv.add_row(
                    {std::to_string(i), format_real(res.grid[i]), format_real(res.readings[i])});
            emit(in_csv, csv.str());
        }
        std::cout << "M=" << M << "\nbase_term=" << format_real(res.base_term)
                  << "\nlower=" << format_real(res.bracket.lower)
                  << "\nupper=" << format_real(res.bracket.upper)
                  << "\nmidpoint=" << format_real(res.bracket.midpoint())
                  << "\nwidth=" << format_real(res.bracket.width())
                  << "\nmonotone_ok=" << (res.monotone_ok ? 1 : 0)
                  << "\noracle_calls=" << res.oracle_calls << "\n";
    });

    // ---- sample ----
    auto* sample = app.add_subcommand("sample", "seeded Glauber dynamics and MC estimates");
    ModelArgs sm_model;
    sm_model.attach(sample);
    std::string sm_graph, sm_csv;
    long long sm_steps = 100000, sm_burn = 10000, sm_thin = 0;
    uint64_t sm_seed = 1;
    sample->add_option("--graph", sm_graph)->required();
    sample->add_option("--steps", sm_steps, "retained samples");
    sample->add_option("--burn-in", sm_burn);
    sample->add_option("--thin", sm_thin, "Glauber steps between samples (default |V|)");
    sample->add_option("--seed", sm_seed);
    sample->add_option("--csv", sm_csv);
    sample->callback([&]() {
        auto model = sm_model.build();
        auto graph = Multigraph::from_edge_list_file(sm_graph);
        long long thin = sm_thin > 0 ? sm_thin : graph.vertex_count();
        auto est =
            mc_estimate(graph, model, sm_model.build_observable(), sm_steps, sm_burn, thin, sm_seed);
        if (!sm_csv.empty()) {
            CsvWriter csv({"mean", "std_error", "samples", "burn_in", "seed"});
            csv.add_row({format_real(est.mean),
                         est.std_error_defined ? format_real(est.std_error) : "undefined",
                         std::to_string(est.samples), std::to_string(est.burn_in),
                         std::to_string(est.seed)});
            emit(sm_csv, csv.str());
        }
        std::cout << "mean=" << format_real(est.mean) << "\nstd_error="
                  << (est.std_error_defined ? format_real(est.std_error) : "undefined")
                  << "\nsamples=" << est.samples << "\n";
    });

    // ---- run ----
    auto* runc = app.add_subcommand("run", "execute an experiment config (key=value file)");
    std::string run_config, run_replay;
    runc->add_option("config", run_config, "config file")->required();
    runc->add_option("--replay-out", run_replay, "write the normalized replay config here");
    runc->callback([&]() {
        int rc = cmd_run(run_config, run_replay);
        if (rc != 0) throw CLI::RuntimeError(rc);
    });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return run_cli(args);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const BudgetError& e) {
        std::cerr << "budget error: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
