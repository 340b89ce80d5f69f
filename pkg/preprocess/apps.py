from django.apps import AppConfig


class PreprocessConfig(AppConfig):
    name = 'preprocess'
