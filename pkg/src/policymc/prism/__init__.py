from .analysis import fold_constants, label_states, parse_model, substitute
from .eval import compile_expr, eval_expr, evaluate_reference, typecheck
from .parser import parse_expression_text, parse_program
from .syntax import (
    Binary, BoolLit, Call, Command, DEADLOCK_ACTION, Expr, IntLit, ModuleDecl,
    RealLit, ResolvedVar, RewardItem, SILENT_PREFIX, SymbolicModel, Ternary,
    Unary, Update, VarRef, expr_to_str, model_to_str,
)

__all__ = [
    "parse_model", "parse_program", "parse_expression_text", "label_states",
    "fold_constants", "substitute", "compile_expr", "eval_expr",
    "evaluate_reference", "typecheck", "expr_to_str", "model_to_str",
    "SymbolicModel", "Expr", "Command", "Update", "RewardItem", "ResolvedVar",
    "ModuleDecl", "IntLit", "RealLit", "BoolLit", "VarRef", "Unary", "Binary",
    "Ternary", "Call", "SILENT_PREFIX", "DEADLOCK_ACTION",
]
