#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "dforms/alt_tensor.hpp"
#include "dforms/domain.hpp"
#include "dforms/expr.hpp"
#include "dforms/form_field.hpp"
#include "dforms/integrate.hpp"
#include "dforms/measure.hpp"

namespace dforms::io {

using json = nlohmann::json;

/// Malformed input; `where` is a JSON path such as fixtures.omega.coeffs[1].expr.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string where, const std::string& what)
      : std::runtime_error(where.empty() ? what : where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

json to_json(const AltTensor& t);
AltTensor alt_tensor_from_json(const json& j, const std::string& where = "");

json to_json(const Expr& e);
Expr expr_from_json(const json& j, const std::string& where = "");

json to_json(const FormField& f);
FormField form_from_json(const json& j, const std::string& where = "");

json to_json(const GaussianProduct& g);
std::shared_ptr<DifferentiableMeasure> measure_from_json(const json& j, const std::string& where = "");

std::unique_ptr<Domain> domain_from_json(const json& j, int dim, const std::string& where = "");

json to_json(const IntegrationSpec& s);
IntegrationSpec integration_from_json(const json& j, const std::string& where = "");

/// Parses JSON text; syntax errors report line and column.
json parse_text(const std::string& text, const std::string& source);

/// FNV-1a 64-bit digest of a canonical dump, as 16 hex digits.
std::string digest(const json& j);

}  // namespace dforms::io
