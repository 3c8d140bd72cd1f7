#include "pokforge/pcm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <iomanip>
#include <sstream>

#include "pokforge/errors.hpp"

namespace pokforge {

const char* to_string(Side side) { return side == Side::left ? "left" : "right"; }

double MaterialParams::resistivity(Phase phase, double temperature) const {
  const double dt = temperature - t_ambient;
  switch (phase) {
    case Phase::crystalline:
      return rho_crystalline0 * std::exp(-alpha_crystalline * dt);
    case Phase::boundary:
      return rho_boundary0 * std::exp(-alpha_boundary * dt);
    case Phase::amorphous:
      return rho_amorphous0 * std::exp(-alpha_amorphous * dt);
    case Phase::molten:
      return rho_molten;
  }
  return rho_crystalline0;
}

ContactGeometry default_contacts(std::size_t cols) {
  // top: middle quarter; bottoms: 1/16 wide, starting 3/32 in from each edge
  const std::size_t top_w = std::max<std::size_t>(2, cols / 4);
  const std::size_t top_begin = (cols - top_w) / 2;
  const std::size_t bw = std::max<std::size_t>(1, cols / 16);
  const std::size_t inset = std::max<std::size_t>(1, cols * 3 / 32);
  ContactGeometry g;
  g.top = {top_begin, cols - top_begin};
  g.left = {inset, inset + bw};
  g.right = {cols - inset - bw, cols - inset};
  return g;
}

std::size_t PcmCell::count(Phase p) const {
  return static_cast<std::size_t>(std::count(phase.begin(), phase.end(), p));
}

std::uint64_t PcmCell::state_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  feed(grains.grain.data(), grains.grain.size() * sizeof(int));
  feed(phase.data(), phase.size());
  feed(temperature.data(), temperature.size() * sizeof(double));
  const unsigned char flag = programmed ? 1 : 0;
  feed(&flag, 1);
  return h;
}

namespace {

void validate_contacts(const ContactGeometry& g, std::size_t cols) {
  for (const auto* s : {&g.top, &g.left, &g.right}) {
    if (s->begin >= s->end || s->end > cols) throw DomainError("contact span empty or outside grid");
  }
  if (g.left.end > g.right.begin) throw DomainError("bottom contacts overlap or are out of order");
}

}  // namespace

PcmCell make_cell(GrainMap grains, const MaterialParams& material, const ContactGeometry& contacts) {
  validate_contacts(contacts, grains.cols);
  if (grains.rows < 2) throw DomainError("cell needs at least two rows");
  if (!(material.alpha_boundary > material.alpha_crystalline && material.alpha_crystalline > 0.0)) {
    throw DomainError("TCR ordering requires alpha_boundary > alpha_crystalline > 0");
  }
  if (!(material.t_melt > material.t_ambient)) throw DomainError("t_melt must exceed ambient");
  if (material.contact_sink < 0.0 || material.contact_sink > 1.0) {
    throw DomainError("contact_sink must lie in [0, 1]");
  }
  if (material.wall_sink < 0.0 || material.wall_sink > 1.0) {
    throw DomainError("wall_sink must lie in [0, 1]");
  }
  PcmCell cell;
  cell.grains = std::move(grains);
  cell.contacts = contacts;
  cell.material = material;
  cell.phase.resize(cell.grains.grain.size());
  for (std::size_t i = 0; i < cell.phase.size(); ++i) {
    cell.phase[i] = cell.grains.boundary[i] ? Phase::boundary : Phase::crystalline;
  }
  cell.temperature.assign(cell.phase.size(), material.t_ambient);
  return cell;
}

namespace {

struct NodeLayout {
  std::size_t cells;
  std::size_t electrode;
  std::size_t left;
  std::size_t right;
  std::size_t source;  // only used with a series resistance
};

NodeLayout layout_for(const PcmCell& cell) {
  const std::size_t n = cell.size();
  return {n, n, n + 1, n + 2, n + 3};
}

std::vector<double> resistivities(const PcmCell& cell, std::span<const double> bias = {}) {
  std::vector<double> rho(cell.size());
  for (std::size_t i = 0; i < rho.size(); ++i) {
    rho[i] = cell.material.resistivity(cell.phase[i], cell.temperature[i]);
    if (!bias.empty()) rho[i] /= bias[i];
  }
  return rho;
}

// Edges appended in a fixed order: horizontal, vertical, top, left, right.
ResistorNetwork build_network(const PcmCell& cell, std::span<const double> rho, bool with_source) {
  const auto lay = layout_for(cell);
  const std::size_t rows = cell.rows(), cols = cell.cols();
  ResistorNetwork net(with_source ? lay.source + 1 : lay.source);
  net.reserve_edges(2 * rows * cols + cols + 1);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c + 1 < cols; ++c) {
      const std::size_t a = r * cols + c, b = a + 1;
      net.add_edge(a, b, 2.0 / (rho[a] + rho[b]));
    }
  }
  for (std::size_t r = 0; r + 1 < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t a = r * cols + c, b = a + cols;
      net.add_edge(a, b, 2.0 / (rho[a] + rho[b]));
    }
  }
  const std::size_t bottom = (rows - 1) * cols;
  for (std::size_t c = cell.contacts.top.begin; c < cell.contacts.top.end; ++c) {
    net.add_edge(lay.electrode, c, 2.0 / rho[c]);
  }
  for (std::size_t c = cell.contacts.left.begin; c < cell.contacts.left.end; ++c) {
    net.add_edge(lay.left, bottom + c, 2.0 / rho[bottom + c]);
  }
  for (std::size_t c = cell.contacts.right.begin; c < cell.contacts.right.end; ++c) {
    net.add_edge(lay.right, bottom + c, 2.0 / rho[bottom + c]);
  }
  return net;
}

CellSolution solve_with(const PcmCell& cell, std::span<const double> rho, const SolveRequest& req,
                        NetworkSolver& solver) {
  const auto lay = layout_for(cell);
  const bool with_source = req.series_resistance > 0.0;
  ResistorNetwork net = build_network(cell, rho, with_source);
  if (with_source) {
    net.add_edge(lay.source, lay.electrode, 1.0 / req.series_resistance);
    net.fix(lay.source, req.v_top);
  } else {
    net.fix(lay.electrode, req.v_top);
  }
  net.fix(lay.left, 0.0);
  net.fix(lay.right, 0.0);

  std::span<const double> warm = req.warm_start.size() == net.node_count() ? req.warm_start
                                                                           : std::span<const double>{};
  NetworkSolution sol = solver.solve(net, warm);

  CellSolution out;
  out.potentials.assign(sol.potentials.begin(), sol.potentials.begin() + static_cast<std::ptrdiff_t>(lay.cells));
  out.v_electrode = sol.potentials[lay.electrode];
  out.i_left = current_into(net, sol.potentials, lay.left);
  out.i_right = current_into(net, sol.potentials, lay.right);
  // current leaving the electrode through its cell edges
  double i_top = 0.0;
  for (const auto& e : net.edges()) {
    if (e.a == lay.electrode && e.b < lay.cells) i_top += e.conductance * (sol.potentials[e.a] - sol.potentials[e.b]);
  }
  out.i_top = i_top;
  out.kcl_error = i_top != 0.0 ? std::abs(i_top - out.i_left - out.i_right) / std::abs(i_top) : 0.0;
  out.max_node_residual = max_kcl_residual(net, sol.potentials);
  out.relative_residual = sol.relative_residual;
  out.iterations = sol.iterations;
  out.node_potentials = std::move(sol.potentials);
  out.network = std::move(net);
  return out;
}

// Joule power per grid cell. Each internal edge splits its dissipation
// between its two half-cells in proportion to their resistances; contact
// edges are a single half-cell.
std::vector<double> joule_power(const PcmCell& cell, std::span<const double> rho, const CellSolution& sol) {
  const auto lay = layout_for(cell);
  std::vector<double> power(cell.size(), 0.0);
  const auto& v = sol.node_potentials;
  for (const auto& e : sol.network.edges()) {
    const double dv = v[e.a] - v[e.b];
    const double p = e.conductance * dv * dv;
    const bool a_cell = e.a < lay.cells, b_cell = e.b < lay.cells;
    if (a_cell && b_cell) {
      const double share = rho[e.a] / (rho[e.a] + rho[e.b]);
      power[e.a] += p * share;
      power[e.b] += p * (1.0 - share);
    } else if (a_cell) {
      power[e.a] += p;
    } else if (b_cell) {
      power[e.b] += p;
    }
  }
  return power;
}

std::vector<std::uint8_t> contact_mask(const PcmCell& cell) {
  std::vector<std::uint8_t> n(cell.size(), 0);
  const std::size_t bottom = (cell.rows() - 1) * cell.cols();
  for (std::size_t c = cell.contacts.top.begin; c < cell.contacts.top.end; ++c) ++n[c];
  for (std::size_t c = cell.contacts.left.begin; c < cell.contacts.left.end; ++c) ++n[bottom + c];
  for (std::size_t c = cell.contacts.right.begin; c < cell.contacts.right.end; ++c) ++n[bottom + c];
  return n;
}

double stability_bound(const MaterialParams& m) { return 1.0 / (4.0 * m.diffusivity + m.substrate_loss); }

// One explicit step of dT/dt = D lap(T) + sink + loss + heating * P.
void advance_temperature(const PcmCell& cell, std::span<const std::uint8_t> contacts,
                         std::span<const double> power, double dt, std::vector<double>& temperature) {
  const auto& m = cell.material;
  const std::size_t rows = cell.rows(), cols = cell.cols();
  std::vector<double> next(temperature.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = r * cols + c;
      const double t = temperature[i];
      double lap = 0.0;
      if (r > 0) lap += temperature[i - cols] - t;
      if (r + 1 < rows) lap += temperature[i + cols] - t;
      if (c > 0) lap += temperature[i - 1] - t;
      if (c + 1 < cols) lap += temperature[i + 1] - t;
      const double sink = m.contact_sink * contacts[i] + m.wall_sink * ((c == 0) + (c + 1 == cols));
      const double rate = m.diffusivity * lap + m.diffusivity * sink * (m.t_ambient - t) -
                    m.substrate_loss * (t - m.t_ambient) + m.heating * power[i];
      next[i] = std::max(m.t_ambient, t + dt * rate);
    }
  }
  temperature.swap(next);
}

bool mirror_symmetric(const PcmCell& cell) {
  const auto& g = cell.contacts;
  const std::size_t cols = cell.cols();
  if (g.top.begin != cols - g.top.end) return false;
  if (g.left.begin != cols - g.right.end || g.left.end != cols - g.right.begin) return false;
  for (std::size_t r = 0; r < cell.rows(); ++r) {
    for (std::size_t c = 0; c < cols / 2; ++c) {
      const std::size_t a = r * cols + c, b = r * cols + (cols - 1 - c);
      if (cell.phase[a] != cell.phase[b] || cell.temperature[a] != cell.temperature[b]) return false;
    }
  }
  return true;
}

}  // namespace

CellSolution solve_potentials(const PcmCell& cell, const SolveRequest& request) {
  const auto rho = resistivities(cell);
  NetworkSolver solver(request.options);
  return solve_with(cell, rho, request, solver);
}

CellSolution solve_potentials(const PcmCell& cell, double v_top) {
  SolveRequest req;
  req.v_top = v_top;
  return solve_potentials(cell, req);
}

std::string trace_csv(const TransientTrace& trace, const std::string& header_comment) {
  std::ostringstream os;
  if (!header_comment.empty()) os << "# " << header_comment << "\n";
  os << "t_s,I_left,I_right,molten_count\n";
  os << std::setprecision(10);
  for (const auto& s : trace) os << s.t << ',' << s.i_left << ',' << s.i_right << ',' << s.molten << '\n';
  return os.str();
}

bool is_plugged(const PcmCell& cell, Side side) {
  const std::size_t rows = cell.rows(), cols = cell.cols();
  std::vector<std::uint8_t> seen(cell.size(), 0);
  std::deque<std::size_t> queue;
  for (std::size_t c = cell.contacts.top.begin; c < cell.contacts.top.end; ++c) {
    if (cell.phase[c] != Phase::amorphous) {
      seen[c] = 1;
      queue.push_back(c);
    }
  }
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    const std::size_t r = i / cols, c = i % cols;
    auto visit = [&](std::size_t j) {
      if (!seen[j] && cell.phase[j] != Phase::amorphous) {
        seen[j] = 1;
        queue.push_back(j);
      }
    };
    if (r > 0) visit(i - cols);
    if (r + 1 < rows) visit(i + cols);
    if (c > 0) visit(i - 1);
    if (c + 1 < cols) visit(i + 1);
  }
  const auto& span = side == Side::left ? cell.contacts.left : cell.contacts.right;
  const std::size_t bottom = (rows - 1) * cols;
  for (std::size_t c = span.begin; c < span.end; ++c) {
    if (seen[bottom + c]) return false;
  }
  return true;
}

double PathResistances::contrast() const {
  const double lo = std::min(left, right), hi = std::max(left, right);
  return lo > 0.0 ? hi / lo : 1.0;
}

PathResistances path_resistances(const PcmCell& cell, const SolveOptions& options) {
  const auto lay = layout_for(cell);
  const auto rho = resistivities(cell);
  PathResistances out;
  for (Side side : {Side::left, Side::right}) {
    ResistorNetwork net = build_network(cell, rho, false);
    net.fix(lay.electrode, 1.0);
    const std::size_t grounded = side == Side::left ? lay.left : lay.right;
    net.fix(grounded, 0.0);
    NetworkSolver solver(options);
    auto sol = solver.solve(net);
    const double current = current_into(net, sol.potentials, grounded);
    (side == Side::left ? out.left : out.right) = 1.0 / current;
  }
  return out;
}

ProgramResult program_pulse(PcmCell& cell, const PulseParams& pulse) {
  if (cell.programmed) throw DomainError("cell is already programmed");
  if (!(pulse.v_prog > pulse.v_read)) throw DomainError("programming voltage must exceed the read voltage");
  if (pulse.steps == 0) throw DomainError("pulse needs at least one step");
  if (!(pulse.dt > 0.0) || pulse.dt > stability_bound(cell.material)) {
    throw DomainError("dt violates the explicit thermal stability bound dt <= 1/(4D + loss)");
  }

  const std::vector<Phase> saved_phase = cell.phase;
  const std::vector<double> saved_temperature = cell.temperature;
  auto rollback = [&] {
    cell.phase = saved_phase;
    cell.temperature = saved_temperature;
  };

  ProgramResult result;
  std::vector<double> bias;
  if (mirror_symmetric(cell)) {
    result.tie_broken = true;
    bias.assign(cell.size(), 1.0);
    for (std::size_t r = 0; r < cell.rows(); ++r) {
      for (std::size_t c = 0; c < cell.cols() / 2; ++c) bias[r * cell.cols() + c] = 1.0 + pulse.tie_epsilon;
    }
  }

  const auto contacts = contact_mask(cell);
  NetworkSolver solver(pulse.solver);
  std::vector<double> warm;
  bool melted = false;
  result.trace.reserve(pulse.steps);
  try {
    for (std::size_t step = 0; step < pulse.steps; ++step) {
      const auto rho = resistivities(cell, bias);
      SolveRequest req;
      req.v_top = pulse.v_prog;
      req.series_resistance = cell.material.driver_resistance;
      req.options = pulse.solver;
      req.warm_start = warm;
      CellSolution sol = solve_with(cell, rho, req, solver);
      result.worst_kcl_error = std::max(result.worst_kcl_error, sol.kcl_error);
      if (sol.kcl_error > pulse.kcl_tolerance) {
        throw SolverError("current conservation violated during programming", sol.kcl_error);
      }
      const auto power = joule_power(cell, rho, sol);
      advance_temperature(cell, contacts, power, pulse.dt, cell.temperature);
      std::size_t molten = 0;
      for (std::size_t i = 0; i < cell.size(); ++i) {
        if (cell.phase[i] != Phase::molten && cell.temperature[i] >= cell.material.t_melt) {
          cell.phase[i] = Phase::molten;
        }
        molten += cell.phase[i] == Phase::molten;
      }
      if (molten > 0 && !melted) {
        melted = true;
        result.melt_onset = step;
      }
      result.trace.push_back({static_cast<double>(step + 1) * pulse.dt, sol.i_left, sol.i_right, molten});
      warm = std::move(sol.node_potentials);
    }
  } catch (...) {
    rollback();
    throw;
  }

  // melt-quench
  for (auto& p : cell.phase) {
    if (p == Phase::molten) p = Phase::amorphous;
  }
  std::fill(cell.temperature.begin(), cell.temperature.end(), cell.material.t_ambient);

  const bool left = is_plugged(cell, Side::left);
  const bool right = is_plugged(cell, Side::right);
  if (left && right) {
    rollback();
    throw OverProgramError("both bottom contacts sealed by amorphous material; lower v_prog or duration");
  }
  if (!left && !right) {
    const bool any = melted;
    rollback();
    throw UnderProgramError(any ? "melting occurred but neither bottom contact was sealed; raise v_prog or duration"
                                : "no cell reached the melting point; raise v_prog or duration");
  }
  result.plugged_side = left ? Side::left : Side::right;
  result.bit = left ? 0 : 1;
  cell.programmed = true;
  result.resistance_contrast = path_resistances(cell).contrast();
  return result;
}

ReadOutcome read_cell(const PcmCell& cell, const ReadParams& params) {
  if (!cell.programmed) throw DomainError("read of an unprogrammed cell");
  SolveRequest req;
  req.v_top = params.v_read;
  req.options = {1e-10, 0};
  const auto rho = resistivities(cell);
  NetworkSolver solver(req.options);
  CellSolution sol = solve_with(cell, rho, req, solver);

  // replay the read pulse's heating on a scratch copy
  std::vector<double> scratch = cell.temperature;
  const auto power = joule_power(cell, rho, sol);
  const auto contacts = contact_mask(cell);
  for (std::size_t s = 0; s < params.disturb_steps; ++s) advance_temperature(cell, contacts, power, params.dt, scratch);
  if (*std::max_element(scratch.begin(), scratch.end()) >= cell.material.t_melt) {
    throw ReadDisturbError("read pulse would melt part of the cell");
  }

  ReadOutcome out;
  out.i_left = sol.i_left;
  out.i_right = sol.i_right;
  out.bit = sol.i_left < sol.i_right ? 0 : 1;
  out.contrast = path_resistances(cell).contrast();
  out.weak = out.contrast < params.contrast_min;
  return out;
}

int read_bit(const PcmCell& cell, const ReadParams& params) {
  const ReadOutcome r = read_cell(cell, params);
  if (r.weak) {
    std::ostringstream os;
    os << "resistance contrast " << r.contrast << " below floor " << params.contrast_min;
    throw WeakCellError(os.str(), r.bit, r.contrast);
  }
  return r.bit;
}

BitString read_word(std::span<const PcmCell> cells, const ReadParams& params) {
  std::vector<std::uint8_t> bits;
  bits.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    try {
      bits.push_back(static_cast<std::uint8_t>(read_bit(cells[i], params)));
    } catch (const WeakCellError& e) {
      throw WeakCellError("cell " + std::to_string(i) + ": " + e.what(), e.bit(), e.contrast(), i);
    }
  }
  return BitString(std::move(bits));
}

}  // namespace pokforge
