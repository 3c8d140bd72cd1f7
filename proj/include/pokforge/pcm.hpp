#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pokforge/bitstring.hpp"
#include "pokforge/grain_map.hpp"
#include "pokforge/network.hpp"

namespace pokforge {

enum class Phase : std::uint8_t { crystalline = 0, boundary = 1, molten = 2, amorphous = 3 };
enum class Side { left, right };

const char* to_string(Side side);

/// Material and driver parameters in arbitrary but consistent units: one
/// grid cell is the unit of length, resistivities are per unit cell.
/// Resistivity follows rho0 * exp(-alpha * (T - T0)) for the solid phases
/// (negative TCR); molten cells use the fixed rho_molten.
struct MaterialParams {
  double rho_crystalline0 = 1.0;
  double rho_boundary0 = 10.0;
  double rho_amorphous0 = 1000.0;
  double rho_molten = 0.1;
  double alpha_crystalline = 0.002;  ///< 1/K
  double alpha_boundary = 0.004;     ///< 1/K, must exceed alpha_crystalline
  double alpha_amorphous = 0.003;    ///< 1/K
  double t_ambient = 300.0;          ///< K, also the contact heat-sink temperature
  double t_melt = 900.0;             ///< K
  double diffusivity = 1.0;          ///< cells^2 per time unit
  double heating = 3000.0;             ///< K per unit dissipated energy in a cell
  double substrate_loss = 0.01;      ///< per time unit, Newton cooling to ambient
  double contact_sink = 1.0;         ///< contact coupling relative to a cell neighbour, in [0,1]
  double wall_sink = 0.3;            ///< side-wall coupling to ambient, in [0,1]
  double driver_resistance = 2.0;    ///< series resistance of the programming driver

  double resistivity(Phase phase, double temperature) const;
};

/// Columns [begin, end) on the top row (top contact) or bottom row.
struct ContactSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t width() const { return end - begin; }
};

struct ContactGeometry {
  ContactSpan top;
  ContactSpan left;
  ContactSpan right;
};

/// Wide centred top contact, two narrow bottom contacts mirrored about the
/// vertical centre line.
ContactGeometry default_contacts(std::size_t cols);

/// Three-contact phase-change cell on a 2D grid: row 0 touches the top
/// contact, row rows-1 touches the bottom contacts.
struct PcmCell {
  GrainMap grains;
  std::vector<Phase> phase;
  std::vector<double> temperature;
  ContactGeometry contacts;
  MaterialParams material;
  bool programmed = false;

  std::size_t rows() const { return grains.rows; }
  std::size_t cols() const { return grains.cols; }
  std::size_t size() const { return phase.size(); }
  std::size_t count(Phase p) const;

  /// FNV-1a over grain ids, phases, temperatures and the programmed flag.
  std::uint64_t state_hash() const;
};

/// Fresh as-fabricated cell: grain-boundary cells in the boundary phase,
/// the rest crystalline, everything at ambient. Throws DomainError on
/// overlapping or out-of-range contacts.
PcmCell make_cell(GrainMap grains, const MaterialParams& material, const ContactGeometry& contacts);

struct CellSolution {
  std::vector<double> potentials;  ///< per grid cell
  double v_electrode = 0.0;        ///< potential of the top contact metal
  double i_top = 0.0;              ///< current leaving the top contact into the cell
  double i_left = 0.0;             ///< current into the left bottom contact
  double i_right = 0.0;
  double kcl_error = 0.0;          ///< |I_top - I_left - I_right| / |I_top|
  double max_node_residual = 0.0;  ///< largest KCL imbalance over free nodes
  double relative_residual = 0.0;
  std::size_t iterations = 0;
  ResistorNetwork network{0};
  std::vector<double> node_potentials;  ///< all network nodes
};

struct SolveRequest {
  double v_top = 0.0;
  /// > 0 puts a series resistor between the source and the top contact;
  /// 0 holds the top contact itself at v_top.
  double series_resistance = 0.0;
  SolveOptions options{};
  std::span<const double> warm_start{};  ///< node potentials from a previous solve
};

/// Builds the conductance network for the cell's current phase and
/// temperature fields and solves it with both bottom contacts grounded.
CellSolution solve_potentials(const PcmCell& cell, const SolveRequest& request);
CellSolution solve_potentials(const PcmCell& cell, double v_top);

struct TraceSample {
  double t = 0.0;
  double i_left = 0.0;
  double i_right = 0.0;
  std::size_t molten = 0;
};

using TransientTrace = std::vector<TraceSample>;

/// CSV with columns t_s,I_left,I_right,molten_count.
std::string trace_csv(const TransientTrace& trace, const std::string& header_comment = {});

struct PulseParams {
  double v_prog = 11.0;
  std::size_t steps = 250;
  double dt = 0.2;
  double v_read = 0.1;
  double kcl_tolerance = 1e-8;
  double tie_epsilon = 1e-3;
  SolveOptions solver{1e-10, 0};
};

struct ProgramResult {
  Side plugged_side = Side::left;
  int bit = 0;
  double resistance_contrast = 1.0;
  TransientTrace trace;
  bool tie_broken = false;     ///< the initial field was exactly mirror-symmetric
  std::size_t melt_onset = 0;  ///< first step with a molten cell
  double worst_kcl_error = 0.0;
};

/// Electro-thermal programming pulse. Each step solves the network through
/// the driver resistance, deposits Joule heat, advances temperatures with
/// an explicit diffusion update (contacts are heat sinks at ambient) and
/// latches cells at or above T_melt as molten. When the pulse ends the
/// molten cells quench to amorphous and temperatures return to ambient.
///
/// Exactly one bottom contact must end up sealed off from the top contact
/// by amorphous material: both sealed throws OverProgramError, neither
/// throws UnderProgramError, and in both cases the cell is left untouched.
/// A perfectly mirror-symmetric cell has no physical seed for the runaway;
/// the left half is then favoured by a relative conductance bias of
/// `tie_epsilon`.
ProgramResult program_pulse(PcmCell& cell, const PulseParams& pulse);

struct PathResistances {
  double left = 0.0;   ///< top-to-left resistance, right contact floating
  double right = 0.0;
  double contrast() const;
};

PathResistances path_resistances(const PcmCell& cell, const SolveOptions& options = {1e-10, 0});

/// True when no path of non-amorphous cells joins the given bottom contact
/// to the top contact.
bool is_plugged(const PcmCell& cell, Side side);

struct ReadOutcome {
  int bit = 0;
  double i_left = 0.0;
  double i_right = 0.0;
  double contrast = 1.0;
  bool weak = false;
};

struct ReadParams {
  double v_read = 0.1;
  double contrast_min = 10.0;
  std::size_t disturb_steps = 10;
  double dt = 0.2;
};

/// Non-destructive read: bit 0 when the left contact draws less current.
/// The Joule heating of the read pulse is replayed on a scratch copy of
/// the temperature field; ReadDisturbError if any cell would melt.
ReadOutcome read_cell(const PcmCell& cell, const ReadParams& params = {});

/// As read_cell, but throws WeakCellError (carrying the bit) below the
/// contrast floor.
int read_bit(const PcmCell& cell, const ReadParams& params = {});

/// Concatenated read_bit outputs; WeakCellError carries the failing index.
BitString read_word(std::span<const PcmCell> cells, const ReadParams& params = {});

}  // namespace pokforge
