#include "icicl/prompt.hpp"

namespace icicl::prompt {

namespace {

std::string quote(const std::string& s) { return json(s).dump(-1, ' ', false, json::error_handler_t::replace); }

void input_block(std::string& out, std::size_t index, const api_parameter& p) {
    const auto type = std::string(to_string(p.declared_type.kind()));
    out += "input_" + std::to_string(index) + " = {\n";
    out += "    \"param_name\": " + quote(p.param_name) + ",\n";
    out += "    \"type\": " + quote(type) + ",\n";
    out += "    \"operation_id\": " + quote(p.operation_id) + ",\n";
    out += "    \"description\": " + quote(p.description) + ",\n";
    out += "    \"api_name\": " + quote(p.api_name) + "\n";
    out += "}\n";
    out += "# must generate a unique " + p.param_name + " " + type + "\n";
}

}  // namespace

std::string render(const context::prompt_context& ctx) {
    std::string out(kHeader);
    out.push_back('\n');
    std::size_t i = 0;
    for (const auto& s : ctx.shots) {
        input_block(out, i, s.parameter);
        out += "example_" + std::to_string(i) + " = " +
               s.example.to_json().dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
        ++i;
    }
    input_block(out, i, ctx.target);
    out += "example_" + std::to_string(i) + " = ";
    return out;
}

}  // namespace icicl::prompt
