"""
Основные компоненты приложения.
"""
