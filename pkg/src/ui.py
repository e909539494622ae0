"""
User interface for the command-line tool.
This class provides methods for:
- Showing solve results (power breakdown, per-request placement table)
- Showing sweep and savings summaries
- Showing errors, success and informative messages
"""
import math
from typing import Dict


class UserInterface:
    """Manages console output"""

    @staticmethod
    def display_breakdown(title: str, breakdown) -> None:
        """Show a PowerBreakdown"""
        print(f"\n=== {title} ===")
        print(f"Total power:      {breakdown.total_w:.6f} W")
        print(f"  processing:     {breakdown.proc_w:.6f} W")
        print(f"  VM overhead:    {breakdown.vm_w:.6f} W")
        print(f"  transmission:   {breakdown.traffic_w:.6f} W")

    @staticmethod
    def display_placement(placement) -> None:
        """Show one line per request: host and route"""
        if not placement.hosts:
            print("No requests to place.")
            return
        width = max(len(r) for r in placement.hosts)
        print(f"\n{'request':<{width}}  host     route")
        for req_id in sorted(placement.hosts):
            route = " > ".join(placement.routes.get(req_id, ())) or "(local)"
            print(f"{req_id:<{width}}  {placement.hosts[req_id]:<7}  {route}")
        print(f"Active VM nodes: {', '.join(placement.active_nodes()) or '-'}")

    @staticmethod
    def display_summary(summary: Dict) -> None:
        """Show a run summary; the `summary` dictionary maps labels to values"""
        print("\n=== RUN SUMMARY ===")
        for label, value in summary.items():
            if isinstance(value, float):
                value = "n/a" if math.isnan(value) else f"{value:.4f}"
            print(f"{label}: {value}")

    """
    Methods to provide user feedback during execution.
    They use emojis to make messages clearer and visually distinctive.
    """
    @staticmethod
    def show_error(message: str):
        """Show an error message"""
        print(f"❌ ERROR: {message}")

    @staticmethod
    def show_success(message: str):
        """Show a success message"""
        print(f"✅ SUCCESS: {message}")

    @staticmethod
    def show_info(message: str):
        """Show an informative message"""
        print(f"ℹ️  INFO: {message}")
