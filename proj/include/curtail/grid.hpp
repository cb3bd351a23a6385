#pragma once

// Static grid description: buses, lines and the per-unit bases they are
// expressed in. Everything electrical is per-unit on (base_mva, base_kv).

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace curtail {

enum class BusKind { slack, pq };

struct Bus {
  int id = 0;
  BusKind kind = BusKind::pq;
  double v_min = 0.95;
  double v_max = 1.05;
  bool observable = false;
  bool controllable = false;
  // Rated flexibility of the bus. Degenerate for non-controllable buses.
  double p_min = 0.0;
  double p_max = 0.0;
  double q_min = 0.0;
  double q_max = 0.0;
  // c_0 + c_1 P + c_2 P^2 + ... ; three coefficients (quadratic) by default.
  std::vector<double> cost_coeffs = {0.0, 0.0, 0.0};

  bool operator==(const Bus&) const = default;
};

struct Line {
  int from_bus = 0;
  int to_bus = 0;
  double r = 0.0;
  double x = 0.0;
  double b_shunt = 0.0;  // total line charging, split half/half
  double s_max = 1.0;

  bool operator==(const Line&) const = default;
};

struct Grid {
  std::vector<Bus> buses;
  std::vector<Line> lines;
  double base_mva = 1.0;
  double base_kv = 0.4;

  [[nodiscard]] int size() const { return static_cast<int>(buses.size()); }
  [[nodiscard]] int slack_bus() const;
  [[nodiscard]] std::vector<int> controllable_buses() const;
  [[nodiscard]] std::vector<int> observable_buses() const;

  bool operator==(const Grid&) const = default;
};

/// One finding of `validate`. `rule` is a stable short identifier.
struct GridViolation {
  std::string rule;
  std::string message;
  int bus = -1;
  int line = -1;
};

class GridError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by load_grid when the document parses but violates an invariant.
class GridValidationError : public GridError {
 public:
  explicit GridValidationError(std::vector<GridViolation> findings);
  [[nodiscard]] const std::vector<GridViolation>& findings() const { return findings_; }

 private:
  std::vector<GridViolation> findings_;
};

[[nodiscard]] std::vector<GridViolation> validate(const Grid& grid);

[[nodiscard]] nlohmann::json grid_to_json(const Grid& grid);
/// Parses and validates; throws GridError / GridValidationError.
[[nodiscard]] Grid grid_from_json(const nlohmann::json& doc);

[[nodiscard]] Grid load_grid(const std::filesystem::path& path);
void save_grid(const Grid& grid, const std::filesystem::path& path);

/// FNV-1a over the canonical JSON serialization.
[[nodiscard]] std::uint64_t grid_hash(const Grid& grid);
[[nodiscard]] std::string hash_hex(std::uint64_t h);
[[nodiscard]] std::uint64_t fnv1a(std::string_view bytes);

}  // namespace curtail
