"""F-RAN vs C-RAN energy-minimal VM placement toolkit"""
